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

#include "bandlimit/conv_layer.hpp"

#include <algorithm>
#include <string>

#include "bandlimit/errors.hpp"
#include "bandlimit/fft.hpp"
#include "bandlimit/parallel.hpp"

namespace bandlimit {

namespace {

Shape spatial_extents(const Tensor& t, int dims, const char* what) {
  if (t.rank() != static_cast<std::size_t>(dims) + 2) {
    throw DimensionError(std::string(what) + " must have rank " + std::to_string(dims + 2) +
                         ", got shape " + shape_string(t.shape()));
  }
  return Shape(t.shape().begin() + 2, t.shape().end());
}

Shape kernel_extents(const ConvSpec& spec) {
  return Shape(static_cast<std::size_t>(spec.dims), spec.kernel_size);
}

Shape output_extents(const Shape& extents, std::size_t kernel, std::size_t stride) {
  Shape out;
  for (std::size_t n : extents) out.push_back((n - kernel) / stride + 1);
  return out;
}

// Copies a plane of extents `src` into the origin of a zero plane of extents
// `dst`.
void embed_plane(std::span<const double> src, const Shape& src_ext,
                 std::span<double> dst, const Shape& dst_ext) {
  std::fill(dst.begin(), dst.end(), 0.0);
  if (src_ext.size() == 1) {
    std::copy(src.begin(), src.end(), dst.begin());
    return;
  }
  for (std::size_t r = 0; r < src_ext[0]; ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r * src_ext[1]), src_ext[1],
                dst.begin() + static_cast<std::ptrdiff_t>(r * dst_ext[1]));
  }
}

// Reads positions i * step (per axis) of a plane into a dense plane of extents
// `out_ext`.
void extract_plane(std::span<const double> src, const Shape& src_ext,
                   std::span<double> dst, const Shape& out_ext, std::size_t step) {
  if (src_ext.size() == 1) {
    for (std::size_t i = 0; i < out_ext[0]; ++i) dst[i] = src[i * step];
    return;
  }
  for (std::size_t r = 0; r < out_ext[0]; ++r) {
    for (std::size_t c = 0; c < out_ext[1]; ++c) {
      dst[r * out_ext[1] + c] = src[(r * step) * src_ext[1] + c * step];
    }
  }
}

// Writes a dense plane of extents `src_ext` at positions i * step (per axis)
// of a zero plane of extents `dst_ext`.
void scatter_plane(std::span<const double> src, const Shape& src_ext,
                   std::span<double> dst, const Shape& dst_ext, std::size_t step) {
  std::fill(dst.begin(), dst.end(), 0.0);
  if (src_ext.size() == 1) {
    for (std::size_t i = 0; i < src_ext[0]; ++i) dst[i * step] = src[i];
    return;
  }
  for (std::size_t r = 0; r < src_ext[0]; ++r) {
    for (std::size_t c = 0; c < src_ext[1]; ++c) {
      dst[(r * step) * dst_ext[1] + c * step] = src[r * src_ext[1] + c];
    }
  }
}

// Storage position of every half-spectrum bin inside a compressed layout, or
// SIZE_MAX when the bin is discarded.
std::vector<std::size_t> storage_positions(const KeptGeometry& g) {
  std::vector<std::size_t> pos(g.half_elements(), SIZE_MAX);
  const auto kept = g.kept_indices();
  for (std::size_t i = 0; i < kept.size(); ++i) pos[kept[i]] = i;
  return pos;
}

// Transforms `count` planes of extents `padded`, filled by fill(i, plane),
// two at a time.
template <typename Fill>
std::vector<HalfSpectrum> transform_group(std::size_t count, const Shape& padded, Fill fill) {
  std::vector<HalfSpectrum> out;
  out.reserve(count);
  Tensor a(padded);
  Tensor b(padded);
  for (std::size_t i = 0; i < count; i += 2) {
    fill(i, a.data());
    out.emplace_back(padded);
    if (i + 1 < count) {
      fill(i + 1, b.data());
      out.emplace_back(padded);
      rfft_plane_pair(a.data(), b.data(), out[i], out[i + 1]);
    } else {
      rfft_plane_into(a.data(), out[i]);
    }
  }
  return out;
}

// Inverts `count` spectra given by their kept values (values(i, acc) fills
// acc in storage order) and hands each spatial plane to sink(i, plane).
template <typename Values, typename Sink>
void invert_group(std::size_t count, const KeptGeometry& g, const std::vector<std::size_t>& kept,
                  Values values, Sink sink) {
  HalfSpectrum ha(g.full_dims());
  HalfSpectrum hb(g.full_dims());
  Tensor pa(g.full_dims());
  Tensor pb(g.full_dims());
  std::vector<Complex> acc(kept.size());
  auto load = [&](std::size_t i, HalfSpectrum& h) {
    values(i, std::span<Complex>(acc));
    for (std::size_t j = 0; j < kept.size(); ++j) h.at(kept[j]) = acc[j];
  };
  for (std::size_t i = 0; i < count; i += 2) {
    load(i, ha);
    if (i + 1 < count) {
      load(i + 1, hb);
      irfft_plane_pair_into(ha, hb, pa.data(), pb.data());
      sink(i, std::span<const double>(pa.data()));
      sink(i + 1, std::span<const double>(pb.data()));
    } else {
      irfft_plane_into(ha, pa.data());
      sink(i, std::span<const double>(pa.data()));
    }
  }
}

void zero_listed(std::span<Complex> values, const std::vector<std::size_t>& positions,
                 const std::vector<std::size_t>& zeroed) {
  for (std::size_t idx : zeroed) values[positions[idx]] = Complex{};
}

void mac_into(std::span<Complex> acc, std::span<const Complex> a,
              std::span<const Complex> b, bool conjugate_b) {
  if (conjugate_b) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += complex_mul3(a[i], std::conj(b[i]));
  } else {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += complex_mul3(a[i], b[i]);
  }
}

// Compresses the spectra of one group (the channels of a sample or of a
// filter bank). TopK selects its zero set jointly over the group.
std::vector<CompressedSpectrum> compress_group(const std::vector<HalfSpectrum>& group,
                                               const KeptGeometry& geometry,
                                               const std::vector<std::size_t>& zeroed,
                                               const CompressionPolicy& policy) {
  std::vector<CompressedSpectrum> out;
  out.reserve(group.size());
  if (const auto* topk = std::get_if<TopK>(&policy)) {
    std::vector<const HalfSpectrum*> ptrs;
    for (const auto& s : group) ptrs.push_back(&s);
    const auto lists = smallest_bins(ptrs, topk->count);
    for (std::size_t i = 0; i < group.size(); ++i) {
      out.push_back(compress_with(group[i], geometry, lists[i]));
    }
    return out;
  }
  for (const auto& s : group) out.push_back(compress_with(s, geometry, zeroed));
  return out;
}

void check_filters(const Tensor& filters, const Tensor& bias, const ConvSpec& spec) {
  Shape expected{spec.out_channels, spec.in_channels};
  for (std::size_t k : kernel_extents(spec)) expected.push_back(k);
  if (filters.shape() != expected) {
    throw DimensionError("filters must have shape " + shape_string(expected) + ", got " +
                         shape_string(filters.shape()));
  }
  if (spec.bias && bias.shape() != Shape{spec.out_channels}) {
    throw DimensionError("bias must have shape [" + std::to_string(spec.out_channels) +
                         "], got " + shape_string(bias.shape()));
  }
}

}  // namespace

void validate_spec(const ConvSpec& spec) {
  if (spec.dims != 1 && spec.dims != 2) throw ParameterError("conv dims must be 1 or 2");
  if (spec.in_channels == 0 || spec.out_channels == 0) {
    throw ParameterError("conv channel counts must be >= 1");
  }
  if (spec.kernel_size == 0) throw ParameterError("kernel size must be >= 1");
  if (spec.stride == 0) throw ParameterError("stride must be >= 1");
  validate_policy(spec.policy);
}

std::size_t required_padding(std::size_t kernel, std::size_t grad_extent) {
  if (kernel == 0 || grad_extent == 0) {
    throw ParameterError("kernel and gradient extents must be >= 1");
  }
  return std::max(kernel - 1, grad_extent - 1);
}

Shape padded_extents(const Shape& extents, std::size_t kernel) {
  Shape out;
  for (std::size_t n : extents) {
    if (n < kernel) {
      throw DimensionError("kernel " + std::to_string(kernel) + " exceeds input extent " +
                           std::to_string(n));
    }
    out.push_back(n + required_padding(kernel, n - kernel + 1));
  }
  return out;
}

Tensor conv_direct(const Tensor& input, const Tensor& filters, std::size_t stride,
                   const Tensor& bias) {
  if (stride == 0) throw ParameterError("stride must be >= 1");
  const int dims = static_cast<int>(input.rank()) - 2;
  if (dims != 1 && dims != 2) throw DimensionError("conv input must have rank 3 or 4");
  if (filters.rank() != input.rank()) throw DimensionError("filter rank mismatch");
  const std::size_t batch = input.extent(0);
  const std::size_t in_ch = input.extent(1);
  const std::size_t out_ch = filters.extent(0);
  if (filters.extent(1) != in_ch) throw DimensionError("filter channel mismatch");
  const Shape ext = spatial_extents(input, dims, "input");
  const Shape kext = spatial_extents(filters, dims, "filters");
  for (int a = 0; a < dims; ++a) {
    if (kext[a] > ext[a]) throw DimensionError("kernel larger than input");
  }
  if (!bias.empty() && bias.shape() != Shape{out_ch}) {
    throw DimensionError("bias must have one entry per output channel");
  }
  Shape out_ext;
  for (int a = 0; a < dims; ++a) out_ext.push_back((ext[a] - kext[a]) / stride + 1);
  Shape out_shape{batch, out_ch};
  out_shape.insert(out_shape.end(), out_ext.begin(), out_ext.end());
  Tensor out(out_shape, 0.0, input.dtype());

  const std::size_t rows = dims == 2 ? out_ext[0] : 1;
  const std::size_t cols = out_ext.back();
  const std::size_t krows = dims == 2 ? kext[0] : 1;
  const std::size_t kcols = kext.back();
  const std::size_t in_cols = ext.back();
  for (std::size_t s = 0; s < batch; ++s) {
    for (std::size_t o = 0; o < out_ch; ++o) {
      auto y = out.slice(s).subspan(o * rows * cols, rows * cols);
      for (std::size_t f = 0; f < in_ch; ++f) {
        const auto x = input.slice(s).subspan(f * shape_elements(ext), shape_elements(ext));
        const auto w = filters.slice(o).subspan(f * krows * kcols, krows * kcols);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < krows; ++i) {
              for (std::size_t j = 0; j < kcols; ++j) {
                acc += x[(r * stride + i) * in_cols + c * stride + j] * w[i * kcols + j];
              }
            }
            y[r * cols + c] += acc;
          }
        }
      }
      if (!bias.empty()) {
        for (double& v : y) v += bias[o];
      }
    }
  }
  out.round_to_dtype();
  return out;
}

CompressedSpectrum pointwise_mac(std::span<const CompressedSpectrum> inputs,
                                 const std::vector<std::vector<CompressedSpectrum>>& filters,
                                 std::size_t out_channel, bool conjugate_filter) {
  if (inputs.empty()) throw DimensionError("pointwise_mac needs at least one channel");
  if (out_channel >= filters.size()) throw DimensionError("output channel out of range");
  const auto& bank = filters[out_channel];
  if (bank.size() != inputs.size()) {
    throw DimensionError("filter bank has " + std::to_string(bank.size()) +
                         " channels, input has " + std::to_string(inputs.size()));
  }
  const KeptGeometry& g = inputs[0].geometry();
  for (std::size_t f = 0; f < inputs.size(); ++f) {
    if (!(inputs[f].geometry() == g) || !(bank[f].geometry() == g)) {
      throw GeometryError("input and filter spectra do not share a kept region");
    }
  }
  std::vector<Complex> acc(g.kept_elements());
  for (std::size_t f = 0; f < inputs.size(); ++f) {
    mac_into(acc, inputs[f].values(), bank[f].values(), conjugate_filter);
  }
  return CompressedSpectrum(g, std::move(acc));
}

ConvForwardResult conv_fft_forward(const Tensor& input, const ConvSpec& spec,
                                   const Tensor& filters, const Tensor& bias,
                                   const ConvForwardOptions& options) {
  validate_spec(spec);
  const Shape ext = spatial_extents(input, spec.dims, "input");
  if (input.extent(1) != spec.in_channels) {
    throw DimensionError("input has " + std::to_string(input.extent(1)) +
                         " channels, layer expects " + std::to_string(spec.in_channels));
  }
  check_filters(filters, bias, spec);
  const std::size_t batch = input.extent(0);
  const std::size_t f_in = spec.in_channels;
  const std::size_t f_out = spec.out_channels;
  const std::size_t K = spec.kernel_size;
  const Shape padded = padded_extents(ext, K);
  const Shape kext = kernel_extents(spec);
  const Shape out_ext = output_extents(ext, K, spec.stride);
  const std::size_t plane = shape_elements(ext);
  const std::size_t kplane = shape_elements(kext);
  const std::size_t out_plane = shape_elements(out_ext);

  SpectraCache cache;
  cache.spec = spec;
  cache.batch = batch;
  cache.extents = ext;
  for (std::size_t n : ext) cache.grad_extent.push_back(n - K + 1);
  cache.padded = padded;
  cache.pad = padded[0] - ext[0];

  auto input_group = [&](std::size_t s) {
    return transform_group(f_in, padded, [&](std::size_t f, std::span<double> buf) {
      embed_plane(input.slice(s).subspan(f * plane, plane), ext, buf, padded);
    });
  };

  // Kept region for the whole layer.
  std::vector<std::size_t> budget_zeroed;
  KeptGeometry geometry = KeptGeometry::full(padded);
  if (options.geometry && !std::holds_alternative<TopK>(spec.policy)) {
    if (options.geometry->full_dims() != padded) {
      throw GeometryError("forced geometry does not match the padded extents");
    }
    geometry = *options.geometry;
  } else if (const auto* fr = std::get_if<FixedRate>(&spec.policy)) {
    geometry = fixed_rate_geometry(padded, fr->rate);
  } else if (const auto* pe = std::get_if<PreserveEnergy>(&spec.policy)) {
    // Budget from the batch-aggregated profile; spectra are recomputed in the
    // second pass so only one full-size map is alive at a time.
    std::vector<double> profile(geometry.half_elements(), 0.0);
    for (std::size_t s = 0; s < batch; ++s) {
      for (const auto& spectrum : input_group(s)) accumulate_energy_profile(spectrum, profile);
    }
    double total = 0.0;
    for (double v : profile) total += v;
    if (total > 0.0) {
      auto budget = energy_budget_from_profile(profile, padded, pe->fraction, pe->granularity);
      geometry = budget.geometry;
      budget_zeroed = std::move(budget.zeroed);
    }
  }
  cache.geometry = geometry;

  // Filter spectra, one bank per output channel.
  cache.filter_spectra.resize(f_out);
  parallel_for(f_out, [&](std::size_t o) {
    const auto bank = transform_group(f_in, padded, [&](std::size_t f, std::span<double> buf) {
      embed_plane(filters.slice(o).subspan(f * kplane, kplane), kext, buf, padded);
    });
    cache.filter_spectra[o] = compress_group(bank, geometry, budget_zeroed, spec.policy);
  });

  Shape out_shape{batch, f_out};
  out_shape.insert(out_shape.end(), out_ext.begin(), out_ext.end());
  Tensor output(out_shape, 0.0, input.dtype());
  cache.input_spectra.resize(batch);
  const auto kept = geometry.kept_indices();

  parallel_for(batch, [&](std::size_t s) {
    const std::vector<CompressedSpectrum> spectra =
        compress_group(input_group(s), geometry, budget_zeroed, spec.policy);
    invert_group(
        f_out, geometry, kept,
        [&](std::size_t o, std::span<Complex> acc) {
          const CompressedSpectrum y = pointwise_mac(spectra, cache.filter_spectra, o, true);
          std::copy(y.values().begin(), y.values().end(), acc.begin());
        },
        [&](std::size_t o, std::span<const double> full) {
          auto dst = output.slice(s).subspan(o * out_plane, out_plane);
          extract_plane(full, padded, dst, out_ext, spec.stride);
          if (spec.bias) {
            for (double& v : dst) v += bias[o];
          }
        });
    if (options.keep_cache) cache.input_spectra[s] = std::move(spectra);
  });
  if (!options.keep_cache) cache.input_spectra.clear();
  output.round_to_dtype();
  return {std::move(output), std::move(cache)};
}

ConvGradients conv_fft_backward(const SpectraCache& cache, const Tensor& grad_output,
                                const ConvSpec& spec) {
  if (cache.empty() || cache.filter_spectra.empty()) {
    throw CacheError("backward pass needs the spectra of a forward pass");
  }
  const ConvSpec& cs = cache.spec;
  if (cs.dims != spec.dims || cs.in_channels != spec.in_channels ||
      cs.out_channels != spec.out_channels || cs.kernel_size != spec.kernel_size ||
      cs.stride != spec.stride || cs.bias != spec.bias || !(cs.policy == spec.policy)) {
    throw CacheError("cached spectra were produced by a different layer configuration");
  }
  const std::size_t batch = cache.batch;
  const std::size_t f_in = spec.in_channels;
  const std::size_t f_out = spec.out_channels;
  const Shape& ext = cache.extents;
  const Shape& padded = cache.padded;
  const Shape& gext = cache.grad_extent;
  const Shape kext = kernel_extents(spec);
  const Shape out_ext = output_extents(ext, spec.kernel_size, spec.stride);
  Shape expected{batch, f_out};
  expected.insert(expected.end(), out_ext.begin(), out_ext.end());
  if (grad_output.shape() != expected) {
    throw CacheError("gradient shape " + shape_string(grad_output.shape()) +
                     " does not match the cached forward output " + shape_string(expected));
  }
  if (cache.input_spectra.size() != batch || cache.filter_spectra.size() != f_out) {
    throw CacheError("cached spectra are incomplete");
  }
  const KeptGeometry& g = cache.geometry;
  const auto kept = g.kept_indices();
  const auto positions = storage_positions(g);
  const std::size_t plane = shape_elements(ext);
  const std::size_t kplane = shape_elements(kext);
  const std::size_t out_plane = shape_elements(out_ext);

  // Output-gradient spectra under the forward kept region.
  std::vector<std::vector<CompressedSpectrum>> grad_spectra(batch);
  parallel_for(batch, [&](std::size_t s) {
    Tensor dense(gext);
    const auto full = transform_group(f_out, padded, [&](std::size_t o, std::span<double> buf) {
      // Upsample strided gradients back onto the stride-1 grid.
      scatter_plane(grad_output.slice(s).subspan(o * out_plane, out_plane), out_ext,
                    dense.data(), gext, spec.stride);
      embed_plane(dense.data(), gext, buf, padded);
    });
    grad_spectra[s].reserve(f_out);
    for (const auto& spectrum : full) grad_spectra[s].push_back(compress_with(spectrum, g));
  });

  Shape in_shape{batch, f_in};
  in_shape.insert(in_shape.end(), ext.begin(), ext.end());
  Tensor grad_input(in_shape, 0.0, grad_output.dtype());
  parallel_for(batch, [&](std::size_t s) {
    invert_group(
        f_in, g, kept,
        [&](std::size_t f, std::span<Complex> acc) {
          std::fill(acc.begin(), acc.end(), Complex{});
          for (std::size_t o = 0; o < f_out; ++o) {
            mac_into(acc, grad_spectra[s][o].values(), cache.filter_spectra[o][f].values(), false);
          }
          zero_listed(acc, positions, cache.input_spectra[s][f].zeroed());
        },
        [&](std::size_t f, std::span<const double> full) {
          extract_plane(full, padded, grad_input.slice(s).subspan(f * plane, plane), ext, 1);
        });
  });

  Shape w_shape{f_out, f_in};
  w_shape.insert(w_shape.end(), kext.begin(), kext.end());
  Tensor grad_filters(w_shape, 0.0, grad_output.dtype());
  parallel_for(f_out, [&](std::size_t o) {
    invert_group(
        f_in, g, kept,
        [&](std::size_t f, std::span<Complex> acc) {
          std::fill(acc.begin(), acc.end(), Complex{});
          for (std::size_t s = 0; s < batch; ++s) {
            mac_into(acc, cache.input_spectra[s][f].values(), grad_spectra[s][o].values(), true);
          }
          zero_listed(acc, positions, cache.filter_spectra[o][f].zeroed());
        },
        [&](std::size_t f, std::span<const double> full) {
          extract_plane(full, padded, grad_filters.slice(o).subspan(f * kplane, kplane), kext, 1);
        });
  });

  Tensor grad_bias;
  if (spec.bias) {
    grad_bias = Tensor({f_out}, 0.0, grad_output.dtype());
    for (std::size_t s = 0; s < batch; ++s) {
      for (std::size_t o = 0; o < f_out; ++o) {
        for (double v : grad_output.slice(s).subspan(o * out_plane, out_plane)) {
          grad_bias[o] += v;
        }
      }
    }
  }
  grad_input.round_to_dtype();
  grad_filters.round_to_dtype();
  grad_bias.round_to_dtype();
  return {std::move(grad_input), std::move(grad_filters), std::move(grad_bias)};
}

std::pair<std::uint64_t, std::uint64_t> op_count_for_kept(const ConvSpec& spec,
                                                          std::size_t batch,
                                                          std::size_t kept) {
  const std::uint64_t base = static_cast<std::uint64_t>(batch) * spec.out_channels *
                             spec.in_channels * kept;
  return {3 * base, 5 * base};
}

std::pair<std::uint64_t, std::uint64_t> op_count_estimate(const ConvSpec& spec,
                                                          const BatchShape& batch) {
  validate_spec(spec);
  if (batch.batch == 0) throw ParameterError("batch size must be >= 1");
  const Shape ext(static_cast<std::size_t>(spec.dims), batch.extent);
  const Shape padded = padded_extents(ext, spec.kernel_size);
  std::size_t kept = KeptGeometry::full(padded).half_elements();
  if (const auto* fr = std::get_if<FixedRate>(&spec.policy)) {
    kept = fixed_rate_geometry(padded, fr->rate).kept_elements();
  }
  return op_count_for_kept(spec, batch.batch, kept);
}

}  // namespace bandlimit
