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

#include "bandlimit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "bandlimit/errors.hpp"

namespace bandlimit {

Shape LabeledDataset::example_shape() const {
  if (examples.rank() < 2) return {};
  return Shape(examples.shape().begin() + 1, examples.shape().end());
}

Tensor LabeledDataset::gather(std::span<const std::size_t> indices) const {
  Shape shape = examples.shape();
  shape[0] = indices.size();
  Tensor out(shape, 0.0, examples.dtype());
  const std::size_t each = examples.slice_size();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) throw DimensionError("example index out of range");
    const auto src = examples.slice(indices[i]);
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * each));
  }
  return out;
}

std::vector<std::size_t> LabeledDataset::gather_labels(std::span<const std::size_t> indices) const {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels.at(i));
  return out;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.examples = gather(indices);
  out.labels = gather_labels(indices);
  out.split = split;
  out.classes = classes;
  return out;
}

void LabeledDataset::validate() const {
  if (examples.rank() < 2 || examples.extent(0) != labels.size()) {
    throw DimensionError("dataset has " + std::to_string(labels.size()) + " labels for examples of shape " +
                         shape_string(examples.shape()));
  }
  for (std::size_t l : labels) {
    if (l >= classes) throw ParameterError("label " + std::to_string(l) + " outside " +
                                           std::to_string(classes) + " classes");
  }
}

void z_normalize(std::span<double> series) {
  if (series.empty()) return;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(series.size());
  if (var < 1e-12) {
    std::fill(series.begin(), series.end(), 0.0);
    return;
  }
  const double sd = std::sqrt(var);
  for (double& v : series) v = (v - mean) / sd;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) +
                      "' as a number");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

LabeledDataset assemble(std::vector<double> values, std::vector<std::size_t> labels,
                        std::size_t classes, Shape example_shape, const std::string& split) {
  Shape shape{labels.size()};
  shape.insert(shape.end(), example_shape.begin(), example_shape.end());
  LabeledDataset d;
  d.examples = Tensor(shape, std::move(values));
  d.labels = std::move(labels);
  d.classes = classes;
  d.split = split;
  return d;
}

}  // namespace

LabeledDataset parse_ucr_text(const std::string& text, LabelMode mode, const std::string& split) {
  std::vector<double> raw_labels;
  std::vector<double> values;
  std::size_t length = 0;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> fields;
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find_first_of(",\t");
      fields.push_back(parse_field(rest.substr(0, pos), line_no));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (fields.size() < 2) {
      throw FormatError("line " + std::to_string(line_no) + ": expected a label and values");
    }
    const std::size_t len = fields.size() - 1;
    if (length == 0) {
      length = len;
    } else if (len != length) {
      throw FormatError("line " + std::to_string(line_no) + ": ragged row with " +
                        std::to_string(len) + " values, expected " + std::to_string(length));
    }
    raw_labels.push_back(fields[0]);
    std::span<double> series(fields.data() + 1, len);
    z_normalize(series);
    values.insert(values.end(), series.begin(), series.end());
  }
  if (raw_labels.empty()) throw FormatError("no series found");

  std::vector<std::size_t> labels;
  std::size_t classes = 0;
  if (mode == LabelMode::verbatim) {
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      const double l = raw_labels[i];
      if (!(l >= 0.0) || l != std::floor(l)) {
        throw FormatError("series " + std::to_string(i + 1) + ": label " + format_double(l) +
                          " is not a non-negative integer (use compact labels)");
      }
      labels.push_back(static_cast<std::size_t>(l));
      classes = std::max(classes, labels.back() + 1);
    }
  } else {
    std::map<double, std::size_t> ids;
    for (double l : raw_labels) ids.emplace(l, 0);
    for (auto& [value, id] : ids) id = classes++;
    for (double l : raw_labels) labels.push_back(ids[l]);
  }
  return assemble(std::move(values), std::move(labels), classes, {1, length}, split);
}

LabeledDataset load_ucr_csv(const std::filesystem::path& path, LabelMode mode,
                            const std::string& split) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_ucr_text(ss.str(), mode, split);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_ucr_csv(const std::filesystem::path& path, const LabeledDataset& data) {
  data.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path.string());
  for (std::size_t i = 0; i < data.size(); ++i) {
    f << data.labels[i];
    for (double v : data.examples.slice(i)) f << ',' << format_double(v);
    f << '\n';
  }
}

LabeledDataset perturb_gaussian(const LabeledDataset& data, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("noise sigma must be finite and >= 0");
  }
  LabeledDataset out = data;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.examples.data()) v += noise(rng);
  out.examples.round_to_dtype();
  return out;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gauss(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

template <typename Gen>
LabeledDataset generate(std::size_t classes, std::size_t per_class, std::uint64_t seed,
                        Shape example_shape, bool normalize, Gen gen) {
  if (per_class == 0) throw ParameterError("per_class must be >= 1");
  Rng rng(seed);
  const std::size_t len = shape_elements(example_shape);
  std::vector<double> values;
  values.reserve(classes * per_class * len);
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      std::vector<double> x(len, 0.0);
      gen(c, x, rng);
      if (normalize) z_normalize(x);
      values.insert(values.end(), x.begin(), x.end());
      labels.push_back(c);
    }
  }
  Shape shape{1};
  shape.insert(shape.end(), example_shape.begin(), example_shape.end());
  return assemble(std::move(values), std::move(labels), classes, shape, "train");
}

}  // namespace

LabeledDataset make_cylinder_bell_funnel(std::size_t per_class, std::uint64_t seed,
                                         std::size_t length) {
  if (length < 16) throw ParameterError("cylinder-bell-funnel needs length >= 16");
  const double scale = static_cast<double>(length) / 128.0;
  return generate(3, per_class, seed, {length}, true, [&](std::size_t c, std::vector<double>& x, Rng& rng) {
    const double a = uniform(rng, 16.0, 32.0) * scale;
    const double b = a + uniform(rng, 32.0, 96.0) * scale;
    const double eta = gauss(rng);
    for (std::size_t t = 0; t < x.size(); ++t) {
      const double tt = static_cast<double>(t);
      double shape = 0.0;
      if (tt >= a && tt <= b) {
        if (c == 0) shape = 1.0;
        if (c == 1) shape = (tt - a) / (b - a);
        if (c == 2) shape = (b - tt) / (b - a);
      }
      x[t] = (6.0 + eta) * shape + gauss(rng);
    }
  });
}

LabeledDataset make_synthetic_control(std::size_t per_class, std::uint64_t seed,
                                      std::size_t length) {
  if (length < 6) throw ParameterError("synthetic control needs length >= 6");
  return generate(6, per_class, seed, {length}, true, [](std::size_t c, std::vector<double>& x, Rng& rng) {
    const double n = static_cast<double>(x.size());
    const double amp = uniform(rng, 10.0, 15.0);
    const double period = uniform(rng, 10.0, 15.0);
    const double slope = uniform(rng, 0.2, 0.5);
    const double jump = uniform(rng, 7.5, 20.0);
    const double onset = uniform(rng, n / 3.0, 2.0 * n / 3.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
      const double tt = static_cast<double>(t);
      double v = 30.0 + 2.0 * uniform(rng, -3.0, 3.0);
      switch (c) {
        case 1: v += amp * std::sin(2.0 * std::numbers::pi * tt / period); break;
        case 2: v += slope * tt; break;
        case 3: v -= slope * tt; break;
        case 4: v += tt >= onset ? jump : 0.0; break;
        case 5: v -= tt >= onset ? jump : 0.0; break;
        default: break;
      }
      x[t] = v;
    }
  });
}

LabeledDataset make_two_patterns(std::size_t per_class, std::uint64_t seed, std::size_t length) {
  if (length < 32) throw ParameterError("two patterns needs length >= 32");
  return generate(4, per_class, seed, {length}, true, [](std::size_t c, std::vector<double>& x, Rng& rng) {
    const std::size_t half = x.size() / 2;
    for (double& v : x) v = gauss(rng);
    // Class bits: first and second pattern are up (+) or down (-) steps.
    const bool up[2] = {(c & 2u) == 0, (c & 1u) == 0};
    for (int p = 0; p < 2; ++p) {
      const auto len = static_cast<std::size_t>(uniform(rng, 0.125, 0.375) * static_cast<double>(half));
      const std::size_t width = std::max<std::size_t>(len, 4);
      const std::size_t room = half - width;
      const std::size_t start = p * half + static_cast<std::size_t>(uniform(rng, 0.0, static_cast<double>(room)));
      for (std::size_t t = 0; t < width; ++t) {
        const bool first_half = t < width / 2;
        const double level = (first_half == up[p]) ? -5.0 : 5.0;
        x[start + t] = level;
      }
    }
  });
}

LabeledDataset make_separable_1d(std::size_t per_class, std::uint64_t seed, std::size_t length) {
  return generate(2, per_class, seed, {length}, false, [](std::size_t c, std::vector<double>& x, Rng& rng) {
    const double offset = (c == 0 ? -1.0 : 1.0) * uniform(rng, 0.5, 1.5);
    for (double& v : x) v = offset + 0.3 * gauss(rng);
  });
}

LabeledDataset make_bars_2d(std::size_t per_class, std::uint64_t seed, std::size_t extent) {
  if (extent < 4) throw ParameterError("bars need extent >= 4");
  return generate(2, per_class, seed, {extent, extent}, true,
                  [extent](std::size_t c, std::vector<double>& x, Rng& rng) {
                    const auto pos = static_cast<std::size_t>(
                        uniform(rng, 1.0, static_cast<double>(extent - 2)));
                    for (std::size_t r = 0; r < extent; ++r) {
                      for (std::size_t col = 0; col < extent; ++col) {
                        const std::size_t d = c == 0 ? r : col;
                        x[r * extent + col] = (d == pos || d == pos + 1 ? 2.0 : 0.0) + 0.3 * gauss(rng);
                      }
                    }
                  });
}

LabeledDataset make_named_dataset(const std::string& name, std::size_t per_class, std::uint64_t seed) {
  if (name == "cbf") return make_cylinder_bell_funnel(per_class, seed);
  if (name == "synthetic_control") return make_synthetic_control(per_class, seed);
  if (name == "two_patterns") return make_two_patterns(per_class, seed);
  if (name == "separable") return make_separable_1d(per_class, seed);
  if (name == "bars") return make_bars_2d(per_class, seed);
  throw ConfigError("unknown dataset '" + name + "'");
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& data,
                                                        double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test fraction must be in (0, 1)");
  }
  data.validate();
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> by_class(data.classes);
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);
  std::vector<std::size_t> train, test;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::lround(test_fraction * static_cast<double>(members.size())));
    test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  auto a = data.subset(train);
  auto b = data.subset(test);
  a.split = "train";
  b.split = "test";
  return {std::move(a), std::move(b)};
}

}  // namespace bandlimit
