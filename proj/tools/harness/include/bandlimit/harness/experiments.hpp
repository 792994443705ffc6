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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bandlimit/band_limit.hpp"
#include "bandlimit/dataset.hpp"
#include "bandlimit/harness/report.hpp"
#include "bandlimit/network.hpp"
#include "bandlimit/tensor.hpp"

namespace bandlimit::harness {

// 100 * ||v - approx|| / ||v||. Throws UndefinedMetricError when v is zero
// and approx is not.
double relative_error(const Tensor& v, const Tensor& approx);

// 100 * compressed / full. Throws ParameterError unless full > 0.
double normalized_performance(double metric_compressed, double metric_full);

// Seeded channels x rows x cols image with a 1/f amplitude spectrum, scaled
// to zero mean and unit variance per channel.
Tensor make_pink_image(std::size_t channels, std::size_t rows, std::size_t cols,
                       std::uint64_t seed);

// out x in x k x k filter bank with Glorot-uniform values.
Tensor make_glorot_filter(std::size_t out_channels, std::size_t in_channels, std::size_t kernel,
                          std::uint64_t seed);

// Median wall time of direct and FFT convolution of a random signal with
// filters of each length. One warm-up run per path is discarded. Rows carry
// nondeterministic = 1; summary["crossover_filter_len"] is the smallest
// filter length where the FFT path wins (null if none).
ExperimentReport bench_crossover(std::size_t signal_len, const std::vector<std::size_t>& filter_lens,
                                 std::size_t repeats, std::uint64_t seed = 0);

enum class ErrorMethod { lead, fine_topk };
std::string error_method_name(ErrorMethod m);
ErrorMethod parse_error_method(const std::string& name);

// Error of band-limited convolution against the uncompressed FFT result.
// Lead: step i keeps the growth geometry i steps below full. FineTopK: step
// 0 zeroes nothing, step 1 zeroes one coefficient and step i >= 2 zeroes
// 10 * (i - 1), jointly over the input channels and over the filter bank.
// Stops early once no further compression is possible.
ExperimentReport bench_error_curve(const Tensor& image, const Tensor& filter, ErrorMethod method,
                                   std::size_t steps);

struct TrainedModel {
  std::string label;
  CompressionPolicy policy = NoCompression{};
  std::uint64_t seed = 0;
  std::optional<Network> net;  // empty when training diverged
  std::vector<EpochMetrics> history;
  std::string failure;
};

// Builds and trains one network. `log` receives one JSON object per epoch
// when given (test accuracy only if `test` is given).
TrainedModel train_model(const NetworkConfig& cfg, const TrainConfig& tc,
                         const LabeledDataset& train, const LabeledDataset* test = nullptr,
                         std::ostream* log = nullptr, std::string label = {});

// Policy for a FixedRate level; 0 means no compression.
CompressionPolicy rate_policy(double rate);

// Evaluates each trained model at every inference rate. Rows: train_rate,
// infer_rate, accuracy, failed (accuracy is NaN for a failed model).
ExperimentReport matrix_from_models(const std::vector<double>& rates_train,
                                    const std::vector<TrainedModel*>& models,
                                    const std::vector<double>& rates_infer,
                                    const LabeledDataset& test);

// Trains one model per training rate (same seed) then fills the matrix.
ExperimentReport matrix_train_infer(const std::vector<double>& rates_train,
                                    const std::vector<double>& rates_infer,
                                    const LabeledDataset& train, const LabeledDataset& test,
                                    const NetworkConfig& cfg, const TrainConfig& tc);

// Row-major accuracy matrix (train rates x infer rates) from a matrix report.
std::vector<std::vector<double>> matrix_accuracies(const ExperimentReport& report);

// Models sharing a label (for example one training policy over several
// seeds) are averaged together.
struct ModelGroup {
  std::string label;
  std::vector<Network*> members;
};

// Accuracy of every group at every sigma, averaged over members and noise
// seeds. Rows: group, sigma, accuracy, accuracy_std (over members x seeds).
ExperimentReport noise_sweep(const std::vector<ModelGroup>& groups, const std::vector<double>& sigmas,
                             const LabeledDataset& test, const std::vector<std::uint64_t>& seeds);

// Ledger peak of one forward + backward pass of a freshly built network on
// `batch` per policy. Rows: policy, peak_bytes, normalized (percent of the
// first policy's peak).
ExperimentReport memory_report(const NetworkConfig& cfg, const std::vector<CompressionPolicy>& policies,
                               const Tensor& batch, const std::vector<std::size_t>& labels,
                               std::uint64_t seed);

}  // namespace bandlimit::harness
