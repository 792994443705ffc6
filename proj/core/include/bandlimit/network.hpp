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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bandlimit/band_limit.hpp"
#include "bandlimit/dataset.hpp"
#include "bandlimit/layers.hpp"

namespace bandlimit {

enum class Architecture { fcn1d, lenet2d };

std::string architecture_name(Architecture a);
Architecture parse_architecture(const std::string& name);

// FCN1D: three "same"-padded conv layers (default banks 128/256/128 scaled by
// `scale`, kernels 8/5/3) with ReLU, global average pooling and a linear
// classifier. LeNet2D: two valid 5x5 conv layers, each followed by ReLU and
// 2x2 max pooling, then a hidden linear layer with ReLU and the classifier.
struct NetworkConfig {
  Architecture architecture = Architecture::fcn1d;
  std::size_t input_channels = 1;
  std::size_t input_extent = 128;
  std::size_t classes = 2;
  double scale = 0.125;
  std::vector<std::size_t> channels;  // empty: architecture defaults
  std::vector<std::size_t> kernels;   // empty: architecture defaults
  std::size_t hidden_units = 64;      // LeNet2D only
  // One policy for every conv layer, or one per conv layer.
  std::vector<CompressionPolicy> policies{NoCompression{}};
  DType dtype = DType::f64;
};

// Fills architecture defaults and checks that the layer shapes compose.
// Throws ConfigError.
NetworkConfig resolve_config(const NetworkConfig& cfg);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double learning_rate = 0.001;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

void validate_train_config(const TrainConfig& tc);

class Network {
 public:
  explicit Network(NetworkConfig cfg) : cfg_(std::move(cfg)) {}

  const NetworkConfig& config() const { return cfg_; }
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
  std::vector<ConvLayer*> conv_layers() const;
  std::vector<Parameter*> parameters() const;
  std::size_t parameter_count() const;
  // Order-sensitive hash of every parameter value.
  std::uint64_t parameter_checksum() const;

  Tensor forward(const Tensor& x, Mode mode);
  void backward(const Tensor& grad);
  void clear_state();

 private:
  NetworkConfig cfg_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

Network build_network(const NetworkConfig& cfg, std::uint64_t seed);

struct LayerCompression {
  double kept = 0.0;   // mean retained coefficients per map
  double ratio = 0.0;  // mean compression ratio, %
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // %
  std::vector<LayerCompression> compression;  // one entry per conv layer
};

// One row per epoch.
using CompressionTrace = std::vector<std::vector<LayerCompression>>;

// One pass of mini-batch SGD with momentum (v = mu v + g; w -= lr v) over a
// seeded shuffle of the data. Throws DivergenceError on a non-finite loss.
EpochMetrics train_epoch(Network& net, const LabeledDataset& data, const TrainConfig& tc,
                         std::size_t epoch);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;  // %
};

// Forward-only pass. `override_policies` holds one policy for all conv
// layers or one per conv layer. Parameters and layer state are untouched.
EvalResult evaluate_full(Network& net, const LabeledDataset& data,
                         const std::optional<std::vector<CompressionPolicy>>& override_policies = {},
                         std::size_t batch_size = 64);
double evaluate(Network& net, const LabeledDataset& data,
                const std::optional<std::vector<CompressionPolicy>>& override_policies = {},
                std::size_t batch_size = 64);

}  // namespace bandlimit
