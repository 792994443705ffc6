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

#include "bandlimit/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bandlimit/errors.hpp"

namespace bandlimit {

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.data()) v = dist(rng);
  t.round_to_dtype();
}

namespace {

Parameter make_parameter(std::string name, const Shape& shape, DType dtype) {
  Parameter p;
  p.name = std::move(name);
  p.value = Tensor(shape, 0.0, dtype);
  p.grad = Tensor(shape, 0.0, dtype);
  p.velocity = Tensor(shape, 0.0, dtype);
  return p;
}

std::size_t power(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvLayer

ConvLayer::ConvLayer(ConvSpec spec, bool same_padding, DType dtype, std::mt19937_64& rng)
    : spec_(std::move(spec)), same_(same_padding) {
  validate_spec(spec_);
  if (same_) {
    pad_before_ = (spec_.kernel_size - 1) / 2;
    pad_after_ = spec_.kernel_size - 1 - pad_before_;
  }
  Shape wshape{spec_.out_channels, spec_.in_channels};
  for (int a = 0; a < spec_.dims; ++a) wshape.push_back(spec_.kernel_size);
  filters_ = make_parameter("filters", wshape, dtype);
  const std::size_t area = power(spec_.kernel_size, spec_.dims);
  glorot_uniform(filters_.value, spec_.in_channels * area, spec_.out_channels * area, rng);
  if (spec_.bias) bias_ = make_parameter("bias", {spec_.out_channels}, dtype);
}

std::string ConvLayer::name() const {
  return "conv" + std::to_string(spec_.dims) + "d(" + std::to_string(spec_.in_channels) +
         "->" + std::to_string(spec_.out_channels) + ", k=" +
         std::to_string(spec_.kernel_size) + ", " + policy_to_string(spec_.policy) + ")";
}

Shape ConvLayer::output_shape(const Shape& input) const {
  if (input.size() != static_cast<std::size_t>(spec_.dims) + 2) {
    throw DimensionError("conv layer input rank mismatch: " + shape_string(input));
  }
  Shape out{input[0], spec_.out_channels};
  for (std::size_t a = 2; a < input.size(); ++a) {
    const std::size_t n = input[a] + pad_before_ + pad_after_;
    if (n < spec_.kernel_size) {
      throw DimensionError("kernel " + std::to_string(spec_.kernel_size) +
                           " exceeds input extent " + std::to_string(input[a]));
    }
    out.push_back((n - spec_.kernel_size) / spec_.stride + 1);
  }
  return out;
}

Shape ConvLayer::fft_extents(const Shape& input_spatial) const {
  Shape padded;
  for (std::size_t n : input_spatial) padded.push_back(n + pad_before_ + pad_after_);
  return padded_extents(padded, spec_.kernel_size);
}

Tensor ConvLayer::pad_input(const Tensor& x) const {
  if (pad_before_ + pad_after_ == 0) return x;
  const Shape& in = x.shape();
  Shape out = in;
  for (std::size_t a = 2; a < in.size(); ++a) out[a] += pad_before_ + pad_after_;
  Tensor y(out, 0.0, x.dtype());
  const std::size_t planes = in[0] * in[1];
  const std::size_t in_plane = shape_elements(Shape(in.begin() + 2, in.end()));
  const std::size_t out_plane = shape_elements(Shape(out.begin() + 2, out.end()));
  const auto src = x.data();
  auto dst = y.data();
  for (std::size_t p = 0; p < planes; ++p) {
    if (spec_.dims == 1) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(p * in_plane), in_plane,
                  dst.begin() + static_cast<std::ptrdiff_t>(p * out_plane + pad_before_));
    } else {
      for (std::size_t r = 0; r < in[2]; ++r) {
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(p * in_plane + r * in[3]), in[3],
                    dst.begin() + static_cast<std::ptrdiff_t>(
                                      p * out_plane + (r + pad_before_) * out[3] + pad_before_));
      }
    }
  }
  return y;
}

Tensor ConvLayer::crop_grad(const Tensor& g) const {
  if (pad_before_ + pad_after_ == 0) return g;
  const Shape& padded = g.shape();
  const Shape& in = input_shape_;
  Tensor y(in, 0.0, g.dtype());
  const std::size_t planes = in[0] * in[1];
  const std::size_t in_plane = shape_elements(Shape(in.begin() + 2, in.end()));
  const std::size_t pad_plane = shape_elements(Shape(padded.begin() + 2, padded.end()));
  const auto src = g.data();
  auto dst = y.data();
  for (std::size_t p = 0; p < planes; ++p) {
    if (spec_.dims == 1) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(p * pad_plane + pad_before_),
                  in_plane, dst.begin() + static_cast<std::ptrdiff_t>(p * in_plane));
    } else {
      for (std::size_t r = 0; r < in[2]; ++r) {
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(
                                      p * pad_plane + (r + pad_before_) * padded[3] + pad_before_),
                    in[3], dst.begin() + static_cast<std::ptrdiff_t>(p * in_plane + r * in[3]));
      }
    }
  }
  return y;
}

Tensor ConvLayer::forward(const Tensor& x, Mode mode) {
  ConvSpec spec = spec_;
  if (mode == Mode::infer && inference_policy_) spec.policy = *inference_policy_;
  ConvForwardOptions options;
  options.keep_cache = mode == Mode::train;
  const Tensor padded = pad_input(x);
  auto result = conv_fft_forward(padded, spec, filters_.value, bias_.value, options);
  if (mode == Mode::train) {
    input_shape_ = x.shape();
    cache_ = std::move(result.cache);
    std::size_t half = 0;
    std::size_t dropped = 0;
    std::size_t maps = 0;
    for (const auto& sample : cache_.input_spectra) {
      for (const auto& cs : sample) {
        half += cs.geometry().half_elements();
        dropped += cs.geometry().half_elements() - cs.geometry().kept_elements() +
                   cs.zeroed().size();
        ++maps;
      }
    }
    stats_.kept = maps == 0 ? 0.0 : static_cast<double>(half - dropped) / static_cast<double>(maps);
    stats_.ratio = half == 0 ? 0.0 : 100.0 * static_cast<double>(dropped) / static_cast<double>(half);
  }
  return std::move(result.output);
}

Tensor ConvLayer::backward(const Tensor& grad) {
  auto grads = conv_fft_backward(cache_, grad, spec_);
  cache_ = SpectraCache{};
  filters_.grad = std::move(grads.grad_filters);
  if (spec_.bias) bias_.grad = std::move(grads.grad_bias);
  return crop_grad(grads.grad_input);
}

std::vector<Parameter*> ConvLayer::parameters() {
  if (spec_.bias) return {&filters_, &bias_};
  return {&filters_};
}

void ConvLayer::clear_state() { cache_ = SpectraCache{}; }

// ---------------------------------------------------------------------------
// ReluLayer

Tensor ReluLayer::forward(const Tensor& x, Mode mode) {
  Tensor y(x.shape(), 0.0, x.dtype());
  const auto src = x.data();
  auto dst = y.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
  if (mode == Mode::train) {
    mask_.assign(src.size(), 0);
    for (std::size_t i = 0; i < src.size(); ++i) mask_[i] = src[i] > 0.0 ? 1 : 0;
    mask_charge_ = LedgerCharge(LedgerScope::current(), "relu-mask", mask_.size());
  }
  return y;
}

Tensor ReluLayer::backward(const Tensor& grad) {
  if (grad.size() != mask_.size()) throw CacheError("relu backward without a matching forward");
  Tensor out(grad.shape(), 0.0, grad.dtype());
  for (std::size_t i = 0; i < mask_.size(); ++i) out[i] = mask_[i] ? grad[i] : 0.0;
  clear_state();
  return out;
}

void ReluLayer::clear_state() {
  mask_.clear();
  mask_.shrink_to_fit();
  mask_charge_ = LedgerCharge{};
}

// ---------------------------------------------------------------------------
// MaxPool2Layer

Shape MaxPool2Layer::output_shape(const Shape& input) const {
  if (input.size() != 4) throw DimensionError("maxpool2 expects S x C x H x W");
  if (input[2] < 2 || input[3] < 2) throw DimensionError("maxpool2 input smaller than 2x2");
  return {input[0], input[1], input[2] / 2, input[3] / 2};
}

Tensor MaxPool2Layer::forward(const Tensor& x, Mode mode) {
  const Shape out_shape = output_shape(x.shape());
  Tensor y(out_shape, 0.0, x.dtype());
  const std::size_t planes = out_shape[0] * out_shape[1];
  const std::size_t h = x.extent(2), w = x.extent(3);
  const std::size_t oh = out_shape[2], ow = out_shape[3];
  std::vector<std::uint32_t> argmax(y.size());
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t c = 0; c < ow; ++c) {
        std::size_t best = (2 * r) * w + 2 * c;
        for (std::size_t dr = 0; dr < 2; ++dr) {
          for (std::size_t dc = 0; dc < 2; ++dc) {
            const std::size_t idx = (2 * r + dr) * w + 2 * c + dc;
            if (x[p * h * w + idx] > x[p * h * w + best]) best = idx;
          }
        }
        y[p * oh * ow + r * ow + c] = x[p * h * w + best];
        argmax[p * oh * ow + r * ow + c] = static_cast<std::uint32_t>(best);
      }
    }
  }
  if (mode == Mode::train) {
    input_shape_ = x.shape();
    argmax_ = std::move(argmax);
    argmax_charge_ = LedgerCharge(LedgerScope::current(), "maxpool-argmax",
                                  argmax_.size() * sizeof(std::uint32_t));
  }
  return y;
}

Tensor MaxPool2Layer::backward(const Tensor& grad) {
  if (grad.size() != argmax_.size()) throw CacheError("maxpool backward without a matching forward");
  Tensor out(input_shape_, 0.0, grad.dtype());
  const std::size_t in_plane = input_shape_[2] * input_shape_[3];
  const std::size_t out_plane = grad.extent(2) * grad.extent(3);
  for (std::size_t i = 0; i < argmax_.size(); ++i) {
    out[(i / out_plane) * in_plane + argmax_[i]] += grad[i];
  }
  clear_state();
  return out;
}

void MaxPool2Layer::clear_state() {
  argmax_.clear();
  argmax_.shrink_to_fit();
  argmax_charge_ = LedgerCharge{};
}

// ---------------------------------------------------------------------------
// GlobalAvgPoolLayer

Shape GlobalAvgPoolLayer::output_shape(const Shape& input) const {
  if (input.size() < 3) throw DimensionError("global pooling expects spatial axes");
  return {input[0], input[1]};
}

Tensor GlobalAvgPoolLayer::forward(const Tensor& x, Mode mode) {
  const Shape out_shape = output_shape(x.shape());
  Tensor y(out_shape, 0.0, x.dtype());
  const std::size_t plane = x.size() / (out_shape[0] * out_shape[1]);
  for (std::size_t p = 0; p < y.size(); ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += x[p * plane + i];
    y[p] = acc / static_cast<double>(plane);
  }
  y.round_to_dtype();
  if (mode == Mode::train) input_shape_ = x.shape();
  return y;
}

Tensor GlobalAvgPoolLayer::backward(const Tensor& grad) {
  Tensor out(input_shape_, 0.0, grad.dtype());
  const std::size_t plane = out.size() / grad.size();
  for (std::size_t p = 0; p < grad.size(); ++p) {
    const double v = grad[p] / static_cast<double>(plane);
    for (std::size_t i = 0; i < plane; ++i) out[p * plane + i] = v;
  }
  out.round_to_dtype();
  return out;
}

// ---------------------------------------------------------------------------
// FlattenLayer

Shape FlattenLayer::output_shape(const Shape& input) const {
  if (input.empty()) throw DimensionError("flatten expects a batch axis");
  return {input[0], shape_elements(Shape(input.begin() + 1, input.end()))};
}

Tensor FlattenLayer::forward(const Tensor& x, Mode mode) {
  if (mode == Mode::train) input_shape_ = x.shape();
  return x.reshaped(output_shape(x.shape()));
}

Tensor FlattenLayer::backward(const Tensor& grad) { return grad.reshaped(input_shape_); }

// ---------------------------------------------------------------------------
// LinearLayer

LinearLayer::LinearLayer(std::size_t in, std::size_t out, DType dtype, std::mt19937_64& rng)
    : in_(in), out_(out) {
  if (in == 0 || out == 0) throw ParameterError("linear layer extents must be >= 1");
  weight_ = make_parameter("weight", {out, in}, dtype);
  glorot_uniform(weight_.value, in, out, rng);
  bias_ = make_parameter("bias", {out}, dtype);
}

std::string LinearLayer::name() const {
  return "linear(" + std::to_string(in_) + "->" + std::to_string(out_) + ")";
}

Shape LinearLayer::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != in_) {
    throw DimensionError("linear layer expects S x " + std::to_string(in_) + ", got " +
                         shape_string(input));
  }
  return {input[0], out_};
}

Tensor LinearLayer::forward(const Tensor& x, Mode mode) {
  const Shape out_shape = output_shape(x.shape());
  Tensor y(out_shape, 0.0, x.dtype());
  const std::size_t batch = out_shape[0];
  for (std::size_t s = 0; s < batch; ++s) {
    for (std::size_t o = 0; o < out_; ++o) {
      double acc = bias_.value[o];
      for (std::size_t i = 0; i < in_; ++i) acc += weight_.value[o * in_ + i] * x[s * in_ + i];
      y[s * out_ + o] = acc;
    }
  }
  y.round_to_dtype();
  if (mode == Mode::train) input_ = x;
  return y;
}

Tensor LinearLayer::backward(const Tensor& grad) {
  if (input_.empty()) throw CacheError("linear backward without a matching forward");
  const std::size_t batch = grad.extent(0);
  weight_.grad.fill(0.0);
  bias_.grad.fill(0.0);
  Tensor dx(input_.shape(), 0.0, grad.dtype());
  for (std::size_t s = 0; s < batch; ++s) {
    for (std::size_t o = 0; o < out_; ++o) {
      const double g = grad[s * out_ + o];
      bias_.grad[o] += g;
      for (std::size_t i = 0; i < in_; ++i) {
        weight_.grad[o * in_ + i] += g * input_[s * in_ + i];
        dx[s * in_ + i] += g * weight_.value[o * in_ + i];
      }
    }
  }
  weight_.grad.round_to_dtype();
  bias_.grad.round_to_dtype();
  dx.round_to_dtype();
  clear_state();
  return dx;
}

std::vector<Parameter*> LinearLayer::parameters() { return {&weight_, &bias_}; }

void LinearLayer::clear_state() { input_ = Tensor{}; }

// ---------------------------------------------------------------------------
// Loss

SoftmaxLoss softmax_cross_entropy(const Tensor& logits, const std::vector<std::size_t>& labels) {
  if (logits.rank() != 2) throw DimensionError("logits must be S x C");
  const std::size_t batch = logits.extent(0);
  const std::size_t classes = logits.extent(1);
  if (labels.size() != batch) throw DimensionError("label count does not match the batch");
  SoftmaxLoss out;
  out.grad = Tensor(logits.shape(), 0.0, logits.dtype());
  double total = 0.0;
  for (std::size_t s = 0; s < batch; ++s) {
    if (labels[s] >= classes) throw ParameterError("label outside the class range");
    const auto row = logits.slice(s);
    std::size_t best = 0;
    double peak = row[0];
    for (std::size_t c = 1; c < classes; ++c) {
      if (row[c] > peak) {
        peak = row[c];
        best = c;
      }
    }
    if (best == labels[s]) ++out.correct;
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - peak);
    const double log_denom = std::log(denom) + peak;
    total += log_denom - row[labels[s]];
    auto g = out.grad.slice(s);
    for (std::size_t c = 0; c < classes; ++c) {
      g[c] = (std::exp(row[c] - log_denom) - (c == labels[s] ? 1.0 : 0.0)) /
             static_cast<double>(batch);
    }
  }
  out.loss = batch == 0 ? 0.0 : total / static_cast<double>(batch);
  out.grad.round_to_dtype();
  return out;
}

}  // namespace bandlimit
