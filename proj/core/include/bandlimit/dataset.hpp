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
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bandlimit/tensor.hpp"

namespace bandlimit {

// Examples are stacked along the leading axis: count x channels x spatial.
struct LabeledDataset {
  Tensor examples;
  std::vector<std::size_t> labels;
  std::string split = "train";
  std::size_t classes = 0;

  std::size_t size() const { return labels.size(); }
  Shape example_shape() const;
  // Copies the listed examples into a batch tensor.
  Tensor gather(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> gather_labels(std::span<const std::size_t> indices) const;
  LabeledDataset subset(std::span<const std::size_t> indices) const;
  // Checks count/label agreement and label range.
  void validate() const;
};

enum class LabelMode {
  verbatim,  // labels must be non-negative integers and are kept as given
  compact,   // distinct label values are mapped to 0..C-1 in ascending order
};

// UCR-style text: one series per line, "label,v1,...,vL". Tabs are accepted
// as separators too. Every series is z-normalized; a constant series maps to
// zeros.
LabeledDataset load_ucr_csv(const std::filesystem::path& path,
                            LabelMode mode = LabelMode::verbatim,
                            const std::string& split = "train");
LabeledDataset parse_ucr_text(const std::string& text, LabelMode mode = LabelMode::verbatim,
                              const std::string& split = "train");
void write_ucr_csv(const std::filesystem::path& path, const LabeledDataset& data);

// In-place z-normalization with a variance guard of 1e-12.
void z_normalize(std::span<double> series);

// Adds i.i.d. N(0, sigma^2) noise to every example value.
LabeledDataset perturb_gaussian(const LabeledDataset& data, double sigma, std::uint64_t seed);

// Synthetic generators. Each draws `per_class` series per class from the
// given seed and z-normalizes them.
LabeledDataset make_cylinder_bell_funnel(std::size_t per_class, std::uint64_t seed,
                                         std::size_t length = 128);
LabeledDataset make_synthetic_control(std::size_t per_class, std::uint64_t seed,
                                      std::size_t length = 60);
LabeledDataset make_two_patterns(std::size_t per_class, std::uint64_t seed,
                                 std::size_t length = 128);
// Two classes separated by the sign of a constant offset plus noise.
LabeledDataset make_separable_1d(std::size_t per_class, std::uint64_t seed,
                                 std::size_t length = 32);
// Single-channel images with a horizontal or vertical bar.
LabeledDataset make_bars_2d(std::size_t per_class, std::uint64_t seed, std::size_t extent = 16);

LabeledDataset make_named_dataset(const std::string& name, std::size_t per_class,
                                  std::uint64_t seed);

// Seeded shuffle into train and test parts.
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& data,
                                                        double test_fraction,
                                                        std::uint64_t seed);

}  // namespace bandlimit
