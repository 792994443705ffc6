// Copyright 2026 The bandlimit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bandlimit/band_limit.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bandlimit/errors.hpp"

namespace bandlimit {

// ---------------------------------------------------------------------------
// Policies

void validate_policy(const CompressionPolicy& policy) {
  std::visit(
      [](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FixedRate>) {
          if (!(p.rate >= 0.0 && p.rate < 1.0)) {
            throw ParameterError("fixed compression rate must be in [0, 1), got " +
                                 std::to_string(p.rate));
          }
        } else if constexpr (std::is_same_v<P, PreserveEnergy>) {
          if (!(p.fraction > 0.0 && p.fraction <= 1.0)) {
            throw ParameterError("preserved energy fraction must be in (0, 1], got " +
                                 std::to_string(p.fraction));
          }
        }
      },
      policy);
}

std::string policy_to_string(const CompressionPolicy& policy) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NoCompression>) {
          os << "none";
        } else if constexpr (std::is_same_v<P, FixedRate>) {
          os << "fixed:" << p.rate;
        } else if constexpr (std::is_same_v<P, PreserveEnergy>) {
          os << "energy:" << p.fraction
             << (p.granularity == Granularity::fine ? ":fine" : ":coarse");
        } else {
          os << "topk:" << p.count;
        }
      },
      policy);
  return os.str();
}

namespace {

double parse_number(std::string_view text, std::string_view whole) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParameterError("malformed compression policy '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

CompressionPolicy parse_policy(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view rest =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  CompressionPolicy policy;
  if (kind == "none" && rest.empty()) {
    policy = NoCompression{};
  } else if (kind == "fixed" && !rest.empty()) {
    policy = FixedRate{parse_number(rest, text)};
  } else if (kind == "energy" && !rest.empty()) {
    PreserveEnergy p;
    const auto second = rest.find(':');
    p.fraction = parse_number(rest.substr(0, second), text);
    if (second != std::string_view::npos) {
      const auto g = rest.substr(second + 1);
      if (g == "fine") {
        p.granularity = Granularity::fine;
      } else if (g != "coarse") {
        throw ParameterError("unknown granularity in '" + std::string(text) + "'");
      }
    }
    policy = p;
  } else if (kind == "topk" && !rest.empty()) {
    const double k = parse_number(rest, text);
    if (k < 0 || k != std::floor(k)) {
      throw ParameterError("topk count must be a non-negative integer");
    }
    policy = TopK{static_cast<std::size_t>(k)};
  } else {
    throw ParameterError("unknown compression policy '" + std::string(text) + "'");
  }
  validate_policy(policy);
  return policy;
}

// ---------------------------------------------------------------------------
// Geometry

KeptGeometry KeptGeometry::full(const std::vector<std::size_t>& full_dims) {
  if (full_dims.size() == 1) return prefix(full_dims[0], half_extent(full_dims[0]));
  if (full_dims.size() == 2) {
    return corners(full_dims[0], full_dims[1], (full_dims[0] + 1) / 2,
                   half_extent(full_dims[1]));
  }
  throw DimensionError("geometry rank must be 1 or 2");
}

KeptGeometry KeptGeometry::prefix(std::size_t length, std::size_t kept) {
  if (length == 0) throw DimensionError("prefix geometry needs length >= 1");
  if (kept == 0 || kept > half_extent(length)) {
    throw ParameterError("kept prefix " + std::to_string(kept) +
                         " outside [1, " + std::to_string(half_extent(length)) + "]");
  }
  KeptGeometry g;
  g.full_dims_ = {length};
  g.rows_ = 1;
  g.cols_ = kept;
  return g;
}

KeptGeometry KeptGeometry::corners(std::size_t rows, std::size_t cols,
                                   std::size_t rows_kept, std::size_t cols_kept) {
  if (rows == 0 || cols == 0) throw DimensionError("corner geometry needs extents >= 1");
  if (rows_kept == 0 || cols_kept == 0) {
    throw ParameterError("corner slabs must keep at least one row and column");
  }
  if (rows_kept > rows || cols_kept > half_extent(cols)) {
    throw ParameterError("corner slabs exceed the half spectrum");
  }
  KeptGeometry g;
  g.full_dims_ = {rows, cols};
  g.rows_ = rows_kept;
  g.cols_ = cols_kept;
  return g;
}

std::size_t KeptGeometry::bottom_rows() const {
  if (rank() != 2) return 0;
  return std::min(rows_, full_dims_[0] - rows_);
}

std::size_t KeptGeometry::half_rows() const {
  return rank() == 2 ? full_dims_[0] : 1;
}

std::size_t KeptGeometry::half_cols() const {
  return full_dims_.empty() ? 0 : half_extent(full_dims_.back());
}

std::size_t KeptGeometry::kept_elements() const {
  if (rank() == 1) return cols_;
  return (rows_ + bottom_rows()) * cols_;
}

bool KeptGeometry::contains(std::size_t row, std::size_t col) const {
  if (col >= cols_) return false;
  if (rank() == 1) return row == 0;
  return row < rows_ || row >= full_dims_[0] - bottom_rows();
}

std::vector<std::size_t> KeptGeometry::kept_indices() const {
  std::vector<std::size_t> out;
  out.reserve(kept_elements());
  const std::size_t h = half_cols();
  if (rank() == 1) {
    for (std::size_t c = 0; c < cols_; ++c) out.push_back(c);
    return out;
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out.push_back(r * h + c);
  }
  const std::size_t m = full_dims_[0];
  for (std::size_t r = m - bottom_rows(); r < m; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out.push_back(r * h + c);
  }
  return out;
}

std::string geometry_to_string(const KeptGeometry& g) {
  std::ostringstream os;
  if (g.rank() == 1) {
    os << "prefix " << g.kept_count() << "/" << g.half_cols();
  } else {
    os << "r=" << g.rows_kept() << " b=" << g.bottom_rows() << " c=" << g.cols_kept()
       << " of " << g.half_rows() << "x" << g.half_cols();
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// CompressedSpectrum

CompressedSpectrum::CompressedSpectrum(KeptGeometry geometry,
                                       std::vector<Complex> values,
                                       std::vector<std::size_t> zeroed,
                                       std::shared_ptr<MemoryLedger> ledger)
    : geometry_(std::move(geometry)),
      values_(std::move(values)),
      zeroed_(std::move(zeroed)) {
  charge_ = LedgerCharge(std::move(ledger), "compressed-spectrum",
                         values_.size() * 2 * element_size(DType::f64));
}

std::span<const Complex> CompressedSpectrum::top_slab() const {
  if (geometry_.rank() != 2) return values_;
  return std::span<const Complex>(values_).first(geometry_.rows_kept() *
                                                 geometry_.cols_kept());
}

std::span<const Complex> CompressedSpectrum::bottom_slab() const {
  if (geometry_.rank() != 2) return {};
  return std::span<const Complex>(values_).subspan(geometry_.rows_kept() *
                                                   geometry_.cols_kept());
}

// ---------------------------------------------------------------------------
// Masks and growth

namespace {

std::size_t ceil_count(double x) {
  // Slack so products like 0.3 * 10 do not round up to the next integer.
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

}  // namespace

std::size_t mask_kept_1d(std::size_t half_len, double rate) {
  if (half_len == 0) throw ParameterError("half length must be >= 1");
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ParameterError("compression rate must be in [0, 1), got " +
                         std::to_string(rate));
  }
  const std::size_t kept = ceil_count((1.0 - rate) * static_cast<double>(half_len));
  return std::clamp<std::size_t>(kept, 1, half_len);
}

std::vector<KeptGeometry> growth_sequence(const std::vector<std::size_t>& full_dims) {
  std::vector<KeptGeometry> seq;
  if (full_dims.size() == 1) {
    const std::size_t h = half_extent(full_dims[0]);
    seq.reserve(h);
    for (std::size_t k = 1; k <= h; ++k) seq.push_back(KeptGeometry::prefix(full_dims[0], k));
    return seq;
  }
  if (full_dims.size() != 2) throw DimensionError("growth sequence rank must be 1 or 2");
  const std::size_t m = full_dims[0];
  const std::size_t n = full_dims[1];
  const std::size_t max_r = (m + 1) / 2;
  const std::size_t max_c = half_extent(n);
  std::size_t r = 1;
  std::size_t c = 1;
  bool row_turn = true;
  seq.push_back(KeptGeometry::corners(m, n, r, c));
  while (r < max_r || c < max_c) {
    const bool grow_row = (row_turn && r < max_r) || c == max_c;
    if (grow_row) {
      ++r;
    } else {
      ++c;
    }
    row_turn = !grow_row;
    seq.push_back(KeptGeometry::corners(m, n, r, c));
  }
  return seq;
}

std::vector<std::size_t> strip_order(const KeptGeometry& inner,
                                     const KeptGeometry& outer) {
  std::vector<std::size_t> added;
  for (std::size_t idx : outer.kept_indices()) {
    if (!inner.contains(idx)) added.push_back(idx);
  }
  if (outer.rank() == 1) return added;
  const std::size_t h = outer.half_cols();
  const std::size_t m = outer.full_dims()[0];
  auto radius = [m](std::size_t row) { return std::min(row, m - row); };
  const bool row_step = outer.rows_kept() != inner.rows_kept();
  std::sort(added.begin(), added.end(), [&](std::size_t a, std::size_t b) {
    const std::size_t ra = a / h, ca = a % h, rb = b / h, cb = b % h;
    if (row_step) {
      if (ca != cb) return ca < cb;
      return a < b;
    }
    if (radius(ra) != radius(rb)) return radius(ra) < radius(rb);
    return a < b;
  });
  return added;
}

KeptGeometry fixed_rate_geometry(const std::vector<std::size_t>& full_dims,
                                 double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ParameterError("compression rate must be in [0, 1), got " +
                         std::to_string(rate));
  }
  if (full_dims.size() == 1) {
    return KeptGeometry::prefix(full_dims[0],
                                mask_kept_1d(half_extent(full_dims[0]), rate));
  }
  const KeptGeometry all = KeptGeometry::full(full_dims);
  const std::size_t target = std::max<std::size_t>(
      1, ceil_count((1.0 - rate) * static_cast<double>(all.half_elements())));
  for (const auto& g : growth_sequence(full_dims)) {
    if (g.kept_elements() >= target) return g;
  }
  return all;
}

// ---------------------------------------------------------------------------
// Energy

std::vector<double> weighted_energy_profile(const HalfSpectrum& s) {
  std::vector<double> profile(s.size(), 0.0);
  accumulate_energy_profile(s, profile);
  return profile;
}

void accumulate_energy_profile(const HalfSpectrum& s, std::span<double> profile) {
  if (profile.size() != s.size()) throw DimensionError("energy profile size mismatch");
  const std::size_t h = s.cols();
  const std::size_t last = s.full_dims().back();
  for (std::size_t i = 0; i < s.size(); ++i) {
    profile[i] += conjugate_weight(i % h, last) * std::norm(s.at(i));
  }
}

EnergyBudget energy_budget_from_profile(std::span<const double> profile,
                                        const std::vector<std::size_t>& full_dims,
                                        double fraction, Granularity granularity) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ParameterError("energy fraction must be in (0, 1], got " +
                         std::to_string(fraction));
  }
  const auto seq = growth_sequence(full_dims);
  if (profile.size() != seq.back().half_elements()) {
    throw DimensionError("energy profile does not match the spectrum extents");
  }
  // Cumulative energy along the growth order; the final entry is the total,
  // summed in the same order so a fraction of 1 is met exactly.
  std::vector<double> cumulative(seq.size());
  double running = 0.0;
  const KeptGeometry* previous = nullptr;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (previous == nullptr) {
      for (std::size_t idx : seq[i].kept_indices()) running += profile[idx];
    } else {
      for (std::size_t idx : strip_order(*previous, seq[i])) running += profile[idx];
    }
    cumulative[i] = running;
    previous = &seq[i];
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) {
    throw UndefinedBudgetError("energy budget is undefined for an all-zero spectrum");
  }
  EnergyBudget budget;
  budget.total = total;
  if (fraction >= 1.0) {
    budget.geometry = seq.back();
    budget.retained = total;
    return budget;
  }
  const double target = fraction * total;
  std::size_t step = 0;
  while (step + 1 < seq.size() && cumulative[step] < target) ++step;
  budget.geometry = seq[step];
  budget.retained = cumulative[step];

  if (granularity == Granularity::fine && step > 0) {
    const auto strip = strip_order(seq[step - 1], seq[step]);
    double acc = cumulative[step - 1];
    std::size_t used = 0;
    while (used < strip.size() && acc < target) acc += profile[strip[used++]];
    budget.zeroed.assign(strip.begin() + static_cast<std::ptrdiff_t>(used), strip.end());
    std::sort(budget.zeroed.begin(), budget.zeroed.end());
    budget.retained = acc;
  }
  return budget;
}

EnergyBudget energy_budget(const HalfSpectrum& s, double fraction,
                           Granularity granularity) {
  const auto profile = weighted_energy_profile(s);
  return energy_budget_from_profile(profile, s.full_dims(), fraction, granularity);
}

// ---------------------------------------------------------------------------
// Compression

CompressedSpectrum compress_with(const HalfSpectrum& s, const KeptGeometry& geometry,
                                 std::span<const std::size_t> zeroed) {
  if (geometry.full_dims() != s.full_dims()) {
    throw GeometryError("geometry extents do not match the spectrum");
  }
  std::vector<Complex> values;
  values.reserve(geometry.kept_elements());
  for (std::size_t idx : geometry.kept_indices()) values.push_back(s.at(idx));
  std::vector<std::size_t> zeros(zeroed.begin(), zeroed.end());
  if (!zeros.empty()) {
    std::sort(zeros.begin(), zeros.end());
    // Map half-spectrum indices to storage positions.
    const auto kept = geometry.kept_indices();
    std::vector<std::size_t> position(geometry.half_elements(), SIZE_MAX);
    for (std::size_t i = 0; i < kept.size(); ++i) position[kept[i]] = i;
    for (std::size_t idx : zeros) {
      if (idx >= position.size() || position[idx] == SIZE_MAX) {
        throw GeometryError("zeroed bin lies outside the kept region");
      }
      values[position[idx]] = Complex{};
    }
  }
  return CompressedSpectrum(geometry, std::move(values), std::move(zeros));
}

CompressedSpectrum compress_1d(const HalfSpectrum& s, const CompressionPolicy& policy) {
  if (s.rank() != 1) throw DimensionError("compress_1d expects a 1D spectrum");
  validate_policy(policy);
  const std::size_t length = s.full_dims()[0];
  return std::visit(
      [&](const auto& p) -> CompressedSpectrum {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NoCompression>) {
          return compress_with(s, KeptGeometry::full(s.full_dims()));
        } else if constexpr (std::is_same_v<P, FixedRate>) {
          return compress_with(
              s, KeptGeometry::prefix(length, mask_kept_1d(s.cols(), p.rate)));
        } else if constexpr (std::is_same_v<P, PreserveEnergy>) {
          const auto budget = energy_budget(s, p.fraction, p.granularity);
          return compress_with(s, budget.geometry, budget.zeroed);
        } else {
          return compress_fine_topk(s, p.count);
        }
      },
      policy);
}

CompressedSpectrum compress_2d_lead(const HalfSpectrum& s,
                                    const CompressionPolicy& policy) {
  if (s.rank() != 2) throw DimensionError("compress_2d_lead expects a 2D spectrum");
  validate_policy(policy);
  return std::visit(
      [&](const auto& p) -> CompressedSpectrum {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NoCompression>) {
          return compress_with(s, KeptGeometry::full(s.full_dims()));
        } else if constexpr (std::is_same_v<P, FixedRate>) {
          return compress_with(s, fixed_rate_geometry(s.full_dims(), p.rate));
        } else if constexpr (std::is_same_v<P, PreserveEnergy>) {
          const auto budget = energy_budget(s, p.fraction, p.granularity);
          return compress_with(s, budget.geometry, budget.zeroed);
        } else {
          return compress_fine_topk(s, p.count);
        }
      },
      policy);
}

CompressedSpectrum compress(const HalfSpectrum& s, const CompressionPolicy& policy) {
  return s.rank() == 1 ? compress_1d(s, policy) : compress_2d_lead(s, policy);
}

std::vector<std::vector<std::size_t>> smallest_bins(
    std::span<const HalfSpectrum* const> spectra, std::size_t k) {
  std::size_t total = 0;
  for (const auto* s : spectra) total += s->size();
  if (k > total) {
    throw ParameterError("cannot zero " + std::to_string(k) + " of " +
                         std::to_string(total) + " coefficients");
  }
  struct Entry {
    double magnitude;
    std::size_t spectrum;
    std::size_t bin;
  };
  std::vector<Entry> entries;
  entries.reserve(total);
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const auto coeffs = spectra[i]->coeffs();
    for (std::size_t b = 0; b < coeffs.size(); ++b) {
      entries.push_back({std::abs(coeffs[b]), i, b});
    }
  }
  auto less = [](const Entry& a, const Entry& b) {
    if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
    if (a.spectrum != b.spectrum) return a.spectrum < b.spectrum;
    return a.bin < b.bin;
  };
  if (k < entries.size()) {
    std::nth_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k),
                     entries.end(), less);
  }
  std::vector<std::vector<std::size_t>> out(spectra.size());
  for (std::size_t i = 0; i < k; ++i) out[entries[i].spectrum].push_back(entries[i].bin);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

CompressedSpectrum compress_fine_topk(const HalfSpectrum& s, std::size_t k) {
  const HalfSpectrum* one[] = {&s};
  const auto zeroed = smallest_bins(one, k);
  return compress_with(s, KeptGeometry::full(s.full_dims()), zeroed[0]);
}

HalfSpectrum decompress(const CompressedSpectrum& cs) {
  const KeptGeometry& g = cs.geometry();
  if (g.full_dims().empty()) throw CorruptionError("compressed spectrum has no geometry");
  if (cs.values().size() != g.kept_elements()) {
    throw CorruptionError("compressed spectrum holds " +
                          std::to_string(cs.values().size()) + " values but its geometry keeps " +
                          std::to_string(g.kept_elements()));
  }
  std::size_t last = 0;
  for (std::size_t i = 0; i < cs.zeroed().size(); ++i) {
    const std::size_t idx = cs.zeroed()[i];
    if (idx >= g.half_elements() || !g.contains(idx) || (i > 0 && idx <= last)) {
      throw CorruptionError("zeroed index list is inconsistent with the geometry");
    }
    last = idx;
  }
  HalfSpectrum out(g.full_dims());
  const auto kept = g.kept_indices();
  const auto values = cs.values();
  for (std::size_t i = 0; i < kept.size(); ++i) out.at(kept[i]) = values[i];
  for (std::size_t idx : cs.zeroed()) out.at(idx) = Complex{};
  return out;
}

double compression_ratio(const CompressedSpectrum& cs) {
  return compression_ratio(std::span<const CompressedSpectrum>(&cs, 1));
}

double compression_ratio(std::span<const CompressedSpectrum> tensor) {
  std::size_t total = 0;
  std::size_t discarded = 0;
  for (const auto& cs : tensor) {
    const auto& g = cs.geometry();
    total += g.half_elements();
    discarded += g.half_elements() - g.kept_elements() + cs.zeroed().size();
  }
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(discarded) / static_cast<double>(total);
}

}  // namespace bandlimit
