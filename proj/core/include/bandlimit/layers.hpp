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
#include <random>
#include <string>
#include <vector>

#include "bandlimit/conv_layer.hpp"
#include "bandlimit/tensor.hpp"

namespace bandlimit {

enum class Mode { train, infer };

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor velocity;
};

// Inference passes never touch layer state, so evaluating a network is free
// of side effects. Training passes keep what backward() needs.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string name() const = 0;
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  virtual Tensor backward(const Tensor& grad) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
  // Drops state held from the last training pass.
  virtual void clear_state() {}
};

struct ConvStats {
  double kept = 0.0;          // retained coefficients per map (mean over maps)
  double ratio = 0.0;         // compression ratio over the input spectra, %
};

// Band-limited convolution with optional spatial "same" padding.
class ConvLayer : public Layer {
 public:
  ConvLayer(ConvSpec spec, bool same_padding, DType dtype, std::mt19937_64& rng);

  std::string name() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override;
  void clear_state() override;

  const ConvSpec& spec() const { return spec_; }
  // Policy used by inference passes; defaults to the training policy.
  void set_inference_policy(std::optional<CompressionPolicy> policy) {
    inference_policy_ = std::move(policy);
  }
  const std::optional<CompressionPolicy>& inference_policy() const { return inference_policy_; }
  // Statistics of the last training forward pass.
  const ConvStats& last_stats() const { return stats_; }
  const SpectraCache& cache() const { return cache_; }
  // Padded spatial extents seen by the FFT for an input of these extents.
  Shape fft_extents(const Shape& input_spatial) const;

 private:
  Tensor pad_input(const Tensor& x) const;
  Tensor crop_grad(const Tensor& g) const;

  ConvSpec spec_;
  bool same_;
  std::size_t pad_before_ = 0;
  std::size_t pad_after_ = 0;
  Parameter filters_;
  Parameter bias_;
  std::optional<CompressionPolicy> inference_policy_;
  SpectraCache cache_;
  Shape input_shape_;
  ConvStats stats_;
};

class ReluLayer : public Layer {
 public:
  std::string name() const override { return "relu"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  void clear_state() override;

 private:
  std::vector<std::uint8_t> mask_;
  LedgerCharge mask_charge_;
};

// 2 x 2 max pooling with stride 2 (odd trailing rows/columns are dropped).
class MaxPool2Layer : public Layer {
 public:
  std::string name() const override { return "maxpool2"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  void clear_state() override;

 private:
  Shape input_shape_;
  std::vector<std::uint32_t> argmax_;
  LedgerCharge argmax_charge_;
};

// Mean over all spatial axes: S x C x ... -> S x C.
class GlobalAvgPoolLayer : public Layer {
 public:
  std::string name() const override { return "gap"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;

 private:
  Shape input_shape_;
};

// S x ... -> S x prod(...).
class FlattenLayer : public Layer {
 public:
  std::string name() const override { return "flatten"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;

 private:
  Shape input_shape_;
};

class LinearLayer : public Layer {
 public:
  LinearLayer(std::size_t in, std::size_t out, DType dtype, std::mt19937_64& rng);
  std::string name() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override;
  void clear_state() override;

 private:
  std::size_t in_;
  std::size_t out_;
  Parameter weight_;  // out x in
  Parameter bias_;
  Tensor input_;
};

// Glorot-uniform fill with limit sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

struct SoftmaxLoss {
  double loss = 0.0;           // mean cross-entropy
  std::size_t correct = 0;     // argmax hits
  Tensor grad;                 // d(mean loss)/d(logits)
};

SoftmaxLoss softmax_cross_entropy(const Tensor& logits,
                                  const std::vector<std::size_t>& labels);

}  // namespace bandlimit
