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

#include "bandlimit/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "bandlimit/errors.hpp"

namespace bandlimit {

std::string architecture_name(Architecture a) {
  return a == Architecture::fcn1d ? "fcn1d" : "lenet2d";
}

Architecture parse_architecture(const std::string& name) {
  if (name == "fcn1d" || name == "fcn") return Architecture::fcn1d;
  if (name == "lenet2d" || name == "lenet") return Architecture::lenet2d;
  throw ConfigError("unknown architecture '" + name + "'");
}

NetworkConfig resolve_config(const NetworkConfig& in) {
  NetworkConfig cfg = in;
  if (cfg.input_channels == 0) throw ConfigError("input_channels must be >= 1");
  if (cfg.input_extent == 0) throw ConfigError("input_extent must be >= 1");
  if (cfg.classes < 2) throw ConfigError("classes must be >= 2");
  if (!(cfg.scale > 0.0)) throw ConfigError("scale must be positive");
  if (cfg.architecture == Architecture::fcn1d) {
    if (cfg.channels.empty()) {
      for (double base : {128.0, 256.0, 128.0}) {
        cfg.channels.push_back(
            std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(base * cfg.scale))));
      }
    }
    if (cfg.kernels.empty()) cfg.kernels = {8, 5, 3};
  } else {
    if (cfg.channels.empty()) cfg.channels = {6, 16};
    if (cfg.kernels.empty()) cfg.kernels = {5, 5};
    if (cfg.hidden_units == 0) throw ConfigError("hidden_units must be >= 1");
  }
  if (cfg.channels.empty() || cfg.channels.size() != cfg.kernels.size()) {
    throw ConfigError("channels and kernels must list the same number of conv layers");
  }
  if (std::find(cfg.channels.begin(), cfg.channels.end(), 0u) != cfg.channels.end() ||
      std::find(cfg.kernels.begin(), cfg.kernels.end(), 0u) != cfg.kernels.end()) {
    throw ConfigError("channel and kernel sizes must be >= 1");
  }
  std::size_t extent = cfg.input_extent;
  for (std::size_t k : cfg.kernels) {
    if (k > extent) {
      throw ConfigError("kernel " + std::to_string(k) + " does not fit an input of extent " +
                        std::to_string(extent));
    }
    if (cfg.architecture == Architecture::lenet2d) {
      extent = (extent - k + 1) / 2;
      if (extent == 0) throw ConfigError("input too small for the pooling stages");
    }
  }
  if (cfg.policies.size() != 1 && cfg.policies.size() != cfg.channels.size()) {
    throw ConfigError("give one compression policy or one per conv layer");
  }
  for (const auto& p : cfg.policies) {
    try {
      validate_policy(p);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

void validate_train_config(const TrainConfig& tc) {
  if (tc.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  // A zero learning rate is accepted so a pass can measure loss without
  // moving the parameters.
  if (!(tc.learning_rate >= 0.0) || !std::isfinite(tc.learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (!(tc.momentum >= 0.0 && tc.momentum < 1.0)) {
    throw ConfigError("momentum must be in [0, 1)");
  }
}

std::vector<ConvLayer*> Network::conv_layers() const {
  std::vector<ConvLayer*> out;
  for (const auto& l : layers_) {
    if (auto* c = dynamic_cast<ConvLayer*>(l.get())) out.push_back(c);
  }
  return out;
}

std::vector<Parameter*> Network::parameters() const {
  std::vector<Parameter*> out;
  for (const auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

std::uint64_t Network::parameter_checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* p : parameters()) {
    for (double v : p->value.data()) {
      h ^= std::bit_cast<std::uint64_t>(v);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

Tensor Network::forward(const Tensor& x, Mode mode) {
  Tensor h = x.dtype() == cfg_.dtype ? x : x.as_dtype(cfg_.dtype);
  for (auto& layer : layers_) h = layer->forward(h, mode);
  return h;
}

void Network::backward(const Tensor& grad) {
  Tensor g = grad;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

void Network::clear_state() {
  for (auto& l : layers_) l->clear_state();
}

Network build_network(const NetworkConfig& in, std::uint64_t seed) {
  const NetworkConfig cfg = resolve_config(in);
  Network net(cfg);
  std::mt19937_64 rng(seed);
  const int dims = cfg.architecture == Architecture::fcn1d ? 1 : 2;
  std::size_t channels = cfg.input_channels;
  std::size_t extent = cfg.input_extent;
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    ConvSpec spec;
    spec.dims = dims;
    spec.in_channels = channels;
    spec.out_channels = cfg.channels[i];
    spec.kernel_size = cfg.kernels[i];
    spec.policy = cfg.policies.size() == 1 ? cfg.policies[0] : cfg.policies[i];
    const bool same = cfg.architecture == Architecture::fcn1d;
    net.add(std::make_unique<ConvLayer>(spec, same, cfg.dtype, rng));
    net.add(std::make_unique<ReluLayer>());
    if (!same) {
      net.add(std::make_unique<MaxPool2Layer>());
      extent = (extent - cfg.kernels[i] + 1) / 2;
    }
    channels = cfg.channels[i];
  }
  if (cfg.architecture == Architecture::fcn1d) {
    net.add(std::make_unique<GlobalAvgPoolLayer>());
    net.add(std::make_unique<LinearLayer>(channels, cfg.classes, cfg.dtype, rng));
  } else {
    net.add(std::make_unique<FlattenLayer>());
    net.add(std::make_unique<LinearLayer>(channels * extent * extent, cfg.hidden_units,
                                          cfg.dtype, rng));
    net.add(std::make_unique<ReluLayer>());
    net.add(std::make_unique<LinearLayer>(cfg.hidden_units, cfg.classes, cfg.dtype, rng));
  }
  return net;
}

namespace {

void check_input(const Network& net, const LabeledDataset& data) {
  if (data.size() == 0) throw ParameterError("dataset is empty");
  data.validate();
  const auto& cfg = net.config();
  const Shape ex = data.example_shape();
  const std::size_t dims = cfg.architecture == Architecture::fcn1d ? 1 : 2;
  Shape expected{cfg.input_channels};
  for (std::size_t a = 0; a < dims; ++a) expected.push_back(cfg.input_extent);
  if (ex != expected) {
    throw ConfigError("examples have shape " + shape_string(ex) + ", network expects " +
                      shape_string(expected));
  }
  if (data.classes > cfg.classes) {
    throw ConfigError("dataset has more classes than the network outputs");
  }
}

// Restores the inference policies of every conv layer on scope exit.
class PolicyOverride {
 public:
  PolicyOverride(Network& net, const std::optional<std::vector<CompressionPolicy>>& policies,
                 const Shape& example_shape)
      : layers_(net.conv_layers()) {
    for (auto* l : layers_) saved_.push_back(l->inference_policy());
    if (!policies) return;
    if (policies->size() != 1 && policies->size() != layers_.size()) {
      throw ConfigError("override needs one policy or one per conv layer");
    }
    // Spatial extents seen by each conv layer.
    Shape spatial(example_shape.begin() + 1, example_shape.end());
    std::vector<Shape> extents;
    for (const auto& layer : net.layers()) {
      if (auto* c = dynamic_cast<ConvLayer*>(layer.get())) extents.push_back(c->fft_extents(spatial));
      Shape full{1, 1};
      full.insert(full.end(), spatial.begin(), spatial.end());
      const Shape out = layer->output_shape(full);
      if (out.size() < 3) break;
      spatial.assign(out.begin() + 2, out.end());
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& p = policies->size() == 1 ? (*policies)[0] : (*policies)[i];
      try {
        validate_policy(p);
      } catch (const ParameterError& e) {
        throw ConfigError(e.what());
      }
      if (const auto* topk = std::get_if<TopK>(&p)) {
        const std::size_t capacity =
            layers_[i]->spec().in_channels * KeptGeometry::full(extents[i]).half_elements();
        if (topk->count > capacity) {
          throw ConfigError("topk count " + std::to_string(topk->count) +
                            " exceeds the layer's " + std::to_string(capacity) +
                            " coefficients per sample");
        }
      }
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i]->set_inference_policy(policies->size() == 1 ? (*policies)[0] : (*policies)[i]);
    }
  }
  ~PolicyOverride() {
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->set_inference_policy(saved_[i]);
  }
  PolicyOverride(const PolicyOverride&) = delete;
  PolicyOverride& operator=(const PolicyOverride&) = delete;

 private:
  std::vector<ConvLayer*> layers_;
  std::vector<std::optional<CompressionPolicy>> saved_;
};

}  // namespace

EpochMetrics train_epoch(Network& net, const LabeledDataset& data, const TrainConfig& tc,
                         std::size_t epoch) {
  validate_train_config(tc);
  check_input(net, data);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(tc.seed + 0x9E3779B97F4A7C15ULL * (epoch + 1));
  std::shuffle(order.begin(), order.end(), rng);

  const auto convs = net.conv_layers();
  EpochMetrics m;
  m.epoch = epoch;
  m.compression.assign(convs.size(), LayerCompression{});
  double loss_sum = 0.0;
  std::size_t correct = 0;
  const auto params = net.parameters();
  for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
    const std::size_t stop = std::min(order.size(), start + tc.batch_size);
    const std::span<const std::size_t> idx(order.data() + start, stop - start);
    const Tensor x = data.gather(idx);
    const auto labels = data.gather_labels(idx);
    const Tensor logits = net.forward(x, Mode::train);
    const SoftmaxLoss l = softmax_cross_entropy(logits, labels);
    if (!std::isfinite(l.loss) || !logits.all_finite()) {
      net.clear_state();
      throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch) +
                            " at example " + std::to_string(start));
    }
    const double weight = static_cast<double>(idx.size());
    loss_sum += l.loss * weight;
    correct += l.correct;
    for (std::size_t i = 0; i < convs.size(); ++i) {
      m.compression[i].kept += convs[i]->last_stats().kept * weight;
      m.compression[i].ratio += convs[i]->last_stats().ratio * weight;
    }
    net.backward(l.grad);
    for (auto* p : params) {
      auto v = p->velocity.data();
      auto w = p->value.data();
      const auto g = p->grad.data();
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = tc.momentum * v[i] + g[i];
        w[i] -= tc.learning_rate * v[i];
      }
      p->velocity.round_to_dtype();
      p->value.round_to_dtype();
    }
  }
  const double n = static_cast<double>(data.size());
  m.loss = loss_sum / n;
  m.accuracy = 100.0 * static_cast<double>(correct) / n;
  for (auto& c : m.compression) {
    c.kept /= n;
    c.ratio /= n;
  }
  return m;
}

EvalResult evaluate_full(Network& net, const LabeledDataset& data,
                         const std::optional<std::vector<CompressionPolicy>>& override_policies,
                         std::size_t batch_size) {
  if (batch_size == 0) throw ParameterError("batch size must be >= 1");
  check_input(net, data);
  PolicyOverride guard(net, override_policies, data.example_shape());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    const std::span<const std::size_t> idx(order.data() + start, stop - start);
    const Tensor logits = net.forward(data.gather(idx), Mode::infer);
    const SoftmaxLoss l = softmax_cross_entropy(logits, data.gather_labels(idx));
    loss_sum += l.loss * static_cast<double>(idx.size());
    correct += l.correct;
  }
  const double n = static_cast<double>(data.size());
  return {loss_sum / n, 100.0 * static_cast<double>(correct) / n};
}

double evaluate(Network& net, const LabeledDataset& data,
                const std::optional<std::vector<CompressionPolicy>>& override_policies,
                std::size_t batch_size) {
  return evaluate_full(net, data, override_policies, batch_size).accuracy;
}

}  // namespace bandlimit
