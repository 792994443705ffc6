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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bandlimit/fft.hpp"

namespace bandlimit {

enum class Granularity { coarse, fine };

struct NoCompression {
  bool operator==(const NoCompression&) const = default;
};

// Discards the same fraction of half-spectrum coefficients in every layer.
struct FixedRate {
  double rate = 0.0;  // in [0, 1)
  bool operator==(const FixedRate&) const = default;
};

// Keeps the smallest low-frequency region holding `fraction` of the energy.
struct PreserveEnergy {
  double fraction = 1.0;  // in (0, 1]
  Granularity granularity = Granularity::coarse;
  bool operator==(const PreserveEnergy&) const = default;
};

// Zeroes the `count` smallest-magnitude coefficients, extents unchanged.
struct TopK {
  std::size_t count = 0;
  bool operator==(const TopK&) const = default;
};

using CompressionPolicy = std::variant<NoCompression, FixedRate, PreserveEnergy, TopK>;

void validate_policy(const CompressionPolicy& policy);
std::string policy_to_string(const CompressionPolicy& policy);
// Accepts "none", "fixed:<rate>", "energy:<fraction>[:coarse|:fine]",
// "topk:<count>".
CompressionPolicy parse_policy(std::string_view text);

// Retained region of a half spectrum.
//
// 1D: the index prefix [0, kept).
// 2D (M x H half spectrum, H = N/2+1): slab S1 = rows [0, r) x cols [0, c)
// and slab S2 = rows [M - b, M) x cols [0, c) with b = min(r, M - r), i.e.
// the two low-frequency corners of the left half. For even M and r <= M/2
// both slabs are r x c.
class KeptGeometry {
 public:
  KeptGeometry() = default;

  static KeptGeometry full(const std::vector<std::size_t>& full_dims);
  static KeptGeometry prefix(std::size_t length, std::size_t kept);
  static KeptGeometry corners(std::size_t rows, std::size_t cols,
                              std::size_t rows_kept, std::size_t cols_kept);

  const std::vector<std::size_t>& full_dims() const { return full_dims_; }
  std::size_t rank() const { return full_dims_.size(); }

  std::size_t kept_count() const { return cols_; }        // 1D prefix length
  std::size_t rows_kept() const { return rows_; }         // 2D r
  std::size_t bottom_rows() const;                        // 2D b
  std::size_t cols_kept() const { return cols_; }         // 2D c

  std::size_t half_rows() const;
  std::size_t half_cols() const;
  std::size_t kept_elements() const;
  std::size_t half_elements() const { return half_rows() * half_cols(); }
  bool is_full() const { return kept_elements() == half_elements(); }

  bool contains(std::size_t row, std::size_t col) const;
  bool contains(std::size_t linear) const {
    return contains(linear / half_cols(), linear % half_cols());
  }

  // Half-spectrum linear indices of kept bins in storage order (S1 rows, then
  // S2 rows).
  std::vector<std::size_t> kept_indices() const;

  bool operator==(const KeptGeometry&) const = default;

 private:
  std::vector<std::size_t> full_dims_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

std::string geometry_to_string(const KeptGeometry& g);

// A half spectrum after band-limiting: kept values in storage order plus the
// indices (half-spectrum linear, ascending) of additionally zeroed bins inside
// the kept region.
class CompressedSpectrum {
 public:
  CompressedSpectrum() = default;
  CompressedSpectrum(KeptGeometry geometry, std::vector<Complex> values,
                     std::vector<std::size_t> zeroed = {},
                     std::shared_ptr<MemoryLedger> ledger = LedgerScope::current());

  const KeptGeometry& geometry() const { return geometry_; }
  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }
  const std::vector<std::size_t>& zeroed() const { return zeroed_; }

  // S1 and S2 views for 2D spectra (S2 empty when b == 0).
  std::span<const Complex> top_slab() const;
  std::span<const Complex> bottom_slab() const;

 private:
  KeptGeometry geometry_;
  std::vector<Complex> values_;
  std::vector<std::size_t> zeroed_;
  LedgerCharge charge_;
};

// max(1, ceil((1 - rate) * half_len)): the retained prefix length.
std::size_t mask_kept_1d(std::size_t half_len, double rate);

// Geometries from DC outwards. 1D: prefixes 1..L/2+1. 2D: starts at (1,1)
// and alternates a row-pair step with a column step until both saturate.
std::vector<KeptGeometry> growth_sequence(const std::vector<std::size_t>& full_dims);

// Bins added when moving from `inner` to the next growth step `outer`, in the
// order fine-grained growth adds them.
std::vector<std::size_t> strip_order(const KeptGeometry& inner,
                                     const KeptGeometry& outer);

KeptGeometry fixed_rate_geometry(const std::vector<std::size_t>& full_dims,
                                 double rate);

// weight * |F|^2 per half-spectrum bin (weights per conjugate_weight).
std::vector<double> weighted_energy_profile(const HalfSpectrum& s);
void accumulate_energy_profile(const HalfSpectrum& s, std::span<double> profile);

struct EnergyBudget {
  KeptGeometry geometry;
  std::vector<std::size_t> zeroed;  // fine granularity only
  double retained = 0.0;            // weighted, unnormalized
  double total = 0.0;
};

// Minimal kept set (in growth order) whose energy reaches fraction * total.
EnergyBudget energy_budget_from_profile(std::span<const double> profile,
                                        const std::vector<std::size_t>& full_dims,
                                        double fraction,
                                        Granularity granularity = Granularity::coarse);
EnergyBudget energy_budget(const HalfSpectrum& s, double fraction,
                           Granularity granularity = Granularity::coarse);

CompressedSpectrum compress_with(const HalfSpectrum& s, const KeptGeometry& geometry,
                                 std::span<const std::size_t> zeroed = {});

CompressedSpectrum compress_1d(const HalfSpectrum& s, const CompressionPolicy& policy);
CompressedSpectrum compress_2d_lead(const HalfSpectrum& s,
                                    const CompressionPolicy& policy);
// Dispatches on the spectrum rank.
CompressedSpectrum compress(const HalfSpectrum& s, const CompressionPolicy& policy);

CompressedSpectrum compress_fine_topk(const HalfSpectrum& s, std::size_t k);

// Jointly picks the k smallest-magnitude bins across several spectra of equal
// extents (ties by ascending spectrum, then bin index). Returns one ascending
// index list per spectrum.
std::vector<std::vector<std::size_t>> smallest_bins(
    std::span<const HalfSpectrum* const> spectra, std::size_t k);

HalfSpectrum decompress(const CompressedSpectrum& cs);

// 100 * (discarded + zeroed) / half-spectrum elements.
double compression_ratio(const CompressedSpectrum& cs);
double compression_ratio(std::span<const CompressedSpectrum> tensor);

}  // namespace bandlimit
