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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bandlimit/band_limit.hpp"
#include "bandlimit/tensor.hpp"

namespace bandlimit {

// Static description of one band-limited convolution layer. Inputs are
// S x f x n (1D) or S x f x n0 x n1 (2D); filters are f' x f x K (x K).
struct ConvSpec {
  int dims = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_size = 1;
  std::size_t stride = 1;
  CompressionPolicy policy = NoCompression{};
  bool bias = true;
};

void validate_spec(const ConvSpec& spec);

struct BatchShape {
  std::size_t batch = 1;
  std::size_t extent = 1;  // n per spatial axis
};

// Spectra saved by the forward pass for reuse in the backward pass.
struct SpectraCache {
  ConvSpec spec;
  std::size_t batch = 0;
  Shape extents;      // n per spatial axis
  Shape grad_extent;  // stride-1 output extent G per axis
  Shape padded;       // n + P per axis
  std::size_t pad = 0;
  KeptGeometry geometry;
  std::vector<std::vector<CompressedSpectrum>> input_spectra;   // [s][f]
  std::vector<std::vector<CompressedSpectrum>> filter_spectra;  // [o][f]

  bool empty() const { return input_spectra.empty(); }
};

// Valid cross-correlation, no kernel flip, out extent floor((n-K)/stride)+1.
// bias may be empty.
Tensor conv_direct(const Tensor& input, const Tensor& filters, std::size_t stride,
                   const Tensor& bias = {});

// P = max(K-1, G-1).
std::size_t required_padding(std::size_t kernel, std::size_t grad_extent);

// Complex product with three real multiplications.
inline Complex complex_mul3(Complex x, Complex y) {
  const double a = x.real(), b = x.imag(), c = y.real(), d = y.imag();
  const double k1 = c * (a + b);
  const double k2 = a * (d - c);
  const double k3 = b * (c + d);
  return {k1 - k3, k1 + k2};
}

// out = sum over f of inputs[f] * filters[out_channel][f] (the filter
// conjugated when conjugate_filter is set). Channels are reduced in order.
CompressedSpectrum pointwise_mac(std::span<const CompressedSpectrum> inputs,
                                 const std::vector<std::vector<CompressedSpectrum>>& filters,
                                 std::size_t out_channel, bool conjugate_filter = true);

struct ConvForwardOptions {
  // Forces the kept region (geometry-only policies); TopK zero lists are
  // still derived from the data.
  std::optional<KeptGeometry> geometry;
  // Inference passes drop the input spectra once a sample is done.
  bool keep_cache = true;
};

struct ConvForwardResult {
  Tensor output;
  SpectraCache cache;
};

ConvForwardResult conv_fft_forward(const Tensor& input, const ConvSpec& spec,
                                   const Tensor& filters, const Tensor& bias = {},
                                   const ConvForwardOptions& options = {});

struct ConvGradients {
  Tensor grad_input;
  Tensor grad_filters;
  Tensor grad_bias;  // empty when the layer has no bias
};

ConvGradients conv_fft_backward(const SpectraCache& cache, const Tensor& grad_output,
                                const ConvSpec& spec);

// (3 S f' f m, 5 S f' f m) real multiplications and additions for the
// spectral multiply-accumulate, with m the retained half-spectrum element
// count implied by the policy. Data-dependent policies use the full count.
std::pair<std::uint64_t, std::uint64_t> op_count_estimate(const ConvSpec& spec,
                                                          const BatchShape& batch);
std::pair<std::uint64_t, std::uint64_t> op_count_for_kept(const ConvSpec& spec,
                                                          std::size_t batch,
                                                          std::size_t kept);

// Padded spatial extents for an input of the given extents.
Shape padded_extents(const Shape& extents, std::size_t kernel);

}  // namespace bandlimit
