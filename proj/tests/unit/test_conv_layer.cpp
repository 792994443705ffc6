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

#include <gtest/gtest.h>

#include <random>

#include "bandlimit/conv_layer.hpp"
#include "bandlimit/errors.hpp"
#include "bandlimit/parallel.hpp"
#include "finite_diff.hpp"

using namespace bandlimit;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = nd(rng);
  return t;
}

double max_rel_error(const Tensor& got, const Tensor& want) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) scale = std::max(scale, std::abs(want[i]));
  for (std::size_t i = 0; i < want.size(); ++i) err = std::max(err, std::abs(got[i] - want[i]));
  return scale == 0.0 ? err : err / scale;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

ConvSpec make_spec(int dims, std::size_t f, std::size_t fo, std::size_t k, std::size_t stride = 1,
                   CompressionPolicy policy = NoCompression{}, bool bias = false) {
  ConvSpec s;
  s.bias = bias;
  s.dims = dims;
  s.in_channels = f;
  s.out_channels = fo;
  s.kernel_size = k;
  s.stride = stride;
  s.policy = policy;
  return s;
}

Shape spatial(int dims, std::size_t lead, std::size_t ch, std::size_t n) {
  return dims == 1 ? Shape{lead, ch, n} : Shape{lead, ch, n, n};
}

}  // namespace

TEST(ConvDirect, Examples) {
  const Tensor x({1, 1, 3}, std::vector<double>{1, 2, 3});
  const Tensor w({1, 1, 2}, std::vector<double>{1, 1});
  const Tensor y = conv_direct(x, w, 1);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 2}));
  EXPECT_EQ(y[0], 3.0);
  EXPECT_EQ(y[1], 5.0);

  const Tensor zero({2, 3, 2}, 0.0);
  const Tensor any = random_tensor({1, 2, 7}, 1);
  EXPECT_THROW(conv_direct(any, zero, 1), DimensionError);  // channel mismatch
  const Tensor zw({3, 2, 2}, 0.0);
  const Tensor zy = conv_direct(any, zw, 1);
  for (double v : zy.data()) EXPECT_EQ(v, 0.0);

  const Tensor x4({1, 1, 4}, std::vector<double>{1, 2, 3, 4});
  const Tensor one({1, 1, 1}, std::vector<double>{1});
  const Tensor s = conv_direct(x4, one, 2);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s[1], 3.0);

  EXPECT_THROW(conv_direct(x, random_tensor({1, 1, 4}, 2), 1), DimensionError);
}

TEST(RequiredPadding, Examples) {
  EXPECT_EQ(required_padding(5, 28), 27u);
  EXPECT_EQ(required_padding(3, 3), 2u);
  EXPECT_EQ(required_padding(1, 1), 0u);
  EXPECT_EQ(padded_extents({32, 32}, 5), (Shape{59, 59}));
}

TEST(ComplexMul3, Examples) {
  EXPECT_EQ(complex_mul3({1, 2}, {3, 4}), Complex(-5, 10));
  const Complex a(2.5, -1.25);
  EXPECT_EQ(complex_mul3(a, {1, 0}), a);
  EXPECT_EQ(complex_mul3(a, {0, 0}), Complex(0, 0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const Complex x(u(rng), u(rng)), y(u(rng), u(rng));
    const Complex want(x.real() * y.real() - x.imag() * y.imag(),
                       x.real() * y.imag() + x.imag() * y.real());
    EXPECT_LE(std::abs(complex_mul3(x, y) - want), 1e-12 * std::abs(x) * std::abs(y));
  }
}

TEST(PointwiseMac, Examples) {
  const auto g = KeptGeometry::prefix(10, 4);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  auto random_cs = [&] {
    std::vector<Complex> v(4);
    for (auto& c : v) c = {nd(rng), nd(rng)};
    return CompressedSpectrum(g, v);
  };
  const std::vector<CompressedSpectrum> one_in{random_cs()};
  const std::vector<std::vector<CompressedSpectrum>> ones{
      {CompressedSpectrum(g, std::vector<Complex>(4, Complex(1.0)))}};
  const auto same = pointwise_mac(one_in, ones, 0, false);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_LE(std::abs(same.values()[i] - one_in[0].values()[i]), 1e-15 * std::abs(one_in[0].values()[i]) + 1e-300);
  }

  const auto filt = random_cs();
  const std::vector<CompressedSpectrum> two_in{one_in[0], one_in[0]};
  const std::vector<std::vector<CompressedSpectrum>> two_f{{filt, filt}};
  const std::vector<std::vector<CompressedSpectrum>> one_f{{filt}};
  const auto twice = pointwise_mac(two_in, two_f, 0);
  const auto single = pointwise_mac(one_in, one_f, 0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(std::abs(twice.values()[i] - 2.0 * single.values()[i]), 1e-14);

  std::vector<CompressedSpectrum> in3;
  std::vector<std::vector<CompressedSpectrum>> f3(2);
  for (int c = 0; c < 3; ++c) {
    in3.push_back(random_cs());
    f3[0].push_back(random_cs());
    f3[1].push_back(random_cs());
  }
  for (bool conj : {false, true}) {
    const auto got = pointwise_mac(in3, f3, 1, conj);
    for (std::size_t i = 0; i < 4; ++i) {
      Complex want = 0.0;
      for (int c = 0; c < 3; ++c) {
        const Complex a = in3[c].values()[i];
        const Complex b = conj ? std::conj(f3[1][c].values()[i]) : f3[1][c].values()[i];
        want += Complex(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
      }
      EXPECT_LE(std::abs(got.values()[i] - want), 1e-12 * (1 + std::abs(want)));
    }
  }

  const std::vector<std::vector<CompressedSpectrum>> mismatched{
      {CompressedSpectrum(KeptGeometry::prefix(10, 3), std::vector<Complex>(3))}};
  EXPECT_THROW(pointwise_mac(one_in, mismatched, 0), GeometryError);
}

TEST(ConvFftForward, HandExample) {
  const Tensor x({1, 1, 4}, std::vector<double>{1, 2, 3, 4});
  const Tensor w({1, 1, 2}, std::vector<double>{1, 1});
  const auto y = conv_fft_forward(x, make_spec(1, 1, 1, 2), w).output;
  ASSERT_EQ(y.size(), 3u);
  EXPECT_NEAR(y[0], 3.0, 1e-12);
  EXPECT_NEAR(y[1], 5.0, 1e-12);
  EXPECT_NEAR(y[2], 7.0, 1e-12);
}

TEST(ConvFftForward, ZeroInputGivesZeroOutput) {
  for (const CompressionPolicy& p : std::vector<CompressionPolicy>{
           NoCompression{}, FixedRate{0.5}, PreserveEnergy{0.9}, TopK{2}}) {
    for (int dims : {1, 2}) {
      const ConvSpec spec = make_spec(dims, 2, 3, 3, 1, p);
      const Tensor x(spatial(dims, 2, 2, 7), 0.0);
      const Tensor w = random_tensor(spatial(dims, 3, 2, 3), 5);
      const Tensor y = conv_fft_forward(x, spec, w).output;
      for (double v : y.data()) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(ConvFftForward, MatchesDirectOnImage) {
  const Tensor x = random_tensor({1, 3, 8, 8}, 6);
  const Tensor w = random_tensor({2, 3, 3, 3}, 7);
  const Tensor b = random_tensor({2}, 8);
  const auto y = conv_fft_forward(x, make_spec(2, 3, 2, 3, 1, NoCompression{}, true), w, b).output;
  EXPECT_LE(max_rel_error(y, conv_direct(x, w, 1, b)), 1e-6);
}

TEST(ConvFftForward, MatchesDirectOnGrid) {
  for (int dims : {1, 2}) {
    for (std::size_t k : {1, 2, 5}) {
      for (std::size_t n : {k, k + 3, std::size_t{12}}) {
        for (std::size_t stride : {1, 2}) {
          const ConvSpec spec = make_spec(dims, 2, 3, k, stride, NoCompression{}, true);
          const Tensor x = random_tensor(spatial(dims, 2, 2, n), n);
          const Tensor w = random_tensor(spatial(dims, 3, 2, k), k);
          const Tensor b = random_tensor({3}, 9);
          const auto y = conv_fft_forward(x, spec, w, b).output;
          EXPECT_LE(max_rel_error(y, conv_direct(x, w, stride, b)), 1e-6)
              << dims << "D n=" << n << " k=" << k << " s=" << stride;
        }
      }
    }
  }
}

TEST(ConvFftForward, Linearity) {
  for (const CompressionPolicy& p : std::vector<CompressionPolicy>{NoCompression{}, FixedRate{0.5}}) {
    const ConvSpec spec = make_spec(1, 2, 2, 3, 1, p);
    const Tensor x = random_tensor({2, 2, 11}, 10);
    const Tensor w = random_tensor({2, 2, 3}, 11);
    Tensor x3 = x;
    for (auto& v : x3.data()) v *= 3.0;
    const auto y = conv_fft_forward(x, spec, w).output;
    const auto y3 = conv_fft_forward(x3, spec, w).output;
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y3[i], 3.0 * y[i], 1e-10 * (1 + std::abs(y3[i])));
  }
}

TEST(ConvFftForward, CacheGeometry) {
  const ConvSpec spec = make_spec(2, 3, 2, 5, 1, FixedRate{0.5});
  const Tensor x = random_tensor({2, 3, 32, 32}, 12);
  const Tensor w = random_tensor({2, 3, 5, 5}, 13);
  const auto r = conv_fft_forward(x, spec, w);
  EXPECT_EQ(r.cache.pad, 27u);
  EXPECT_EQ(r.cache.padded, (Shape{59, 59}));
  EXPECT_EQ(r.cache.grad_extent, (Shape{28, 28}));
  ASSERT_EQ(r.cache.input_spectra.size(), 2u);
  ASSERT_EQ(r.cache.filter_spectra.size(), 2u);
  for (const auto& per : r.cache.input_spectra) {
    for (const auto& cs : per) EXPECT_EQ(cs.geometry(), r.cache.geometry);
  }
  for (const auto& per : r.cache.filter_spectra) {
    for (const auto& cs : per) EXPECT_EQ(cs.geometry(), r.cache.geometry);
  }
  EXPECT_EQ(r.cache.geometry.full_dims(), (std::vector<std::size_t>{59, 59}));
}

TEST(ConvFftForward, ShapeErrors) {
  const ConvSpec spec = make_spec(1, 2, 3, 3);
  EXPECT_THROW(conv_fft_forward(random_tensor({1, 3, 9}, 1), spec, random_tensor({3, 2, 3}, 2)),
               DimensionError);
  EXPECT_THROW(conv_fft_forward(random_tensor({1, 2, 9}, 1), spec, random_tensor({3, 2, 4}, 2)),
               DimensionError);
  EXPECT_THROW(conv_fft_forward(random_tensor({1, 2, 2}, 1), spec, random_tensor({3, 2, 3}, 2)),
               DimensionError);
  ConvSpec bad = spec;
  bad.stride = 0;
  EXPECT_THROW(validate_spec(bad), ParameterError);
  bad = spec;
  bad.policy = FixedRate{1.5};
  EXPECT_THROW(conv_fft_forward(random_tensor({1, 2, 9}, 1), bad, random_tensor({3, 2, 3}, 2)),
               ParameterError);
}

TEST(ConvFftBackward, ZeroGradGivesZero) {
  const ConvSpec spec = make_spec(1, 2, 3, 3, 1, FixedRate{0.5}, true);
  const auto r = conv_fft_forward(random_tensor({2, 2, 9}, 1), spec, random_tensor({3, 2, 3}, 2),
                                  random_tensor({3}, 3));
  const Tensor g(r.output.shape(), 0.0);
  const auto grads = conv_fft_backward(r.cache, g, spec);
  for (double v : grads.grad_input.data()) EXPECT_EQ(v, 0.0);
  for (double v : grads.grad_filters.data()) EXPECT_EQ(v, 0.0);
  for (double v : grads.grad_bias.data()) EXPECT_EQ(v, 0.0);
}

TEST(ConvFftBackward, CacheErrors) {
  const ConvSpec spec = make_spec(1, 2, 3, 3);
  const auto r = conv_fft_forward(random_tensor({2, 2, 9}, 1), spec, random_tensor({3, 2, 3}, 2));
  EXPECT_THROW(conv_fft_backward(SpectraCache{}, r.output, spec), CacheError);
  ConvSpec other = spec;
  other.policy = FixedRate{0.5};
  EXPECT_THROW(conv_fft_backward(r.cache, r.output, other), CacheError);
  EXPECT_THROW(conv_fft_backward(r.cache, random_tensor({2, 3, 6}, 4), spec), CacheError);
}

struct GradCase {
  int dims;
  std::size_t stride;
  CompressionPolicy policy;
};

class ConvGradient : public ::testing::TestWithParam<GradCase> {};

// Finite differences of the band-limited forward map itself.
TEST_P(ConvGradient, MatchesFiniteDifferences) {
  const auto [dims, stride, policy] = GetParam();
  const ConvSpec spec = make_spec(dims, 2, 3, 3, stride, policy, true);
  Tensor x = random_tensor(dims == 1 ? Shape{2, 2, 11} : Shape{2, 2, 7, 6}, 21);
  Tensor w = random_tensor(spatial(dims, 3, 2, 3), 22);
  Tensor b = random_tensor({3}, 23);
  const auto fwd = conv_fft_forward(x, spec, w, b);
  const Tensor r = random_tensor(fwd.output.shape(), 24);
  const auto grads = conv_fft_backward(fwd.cache, r, spec);
  auto loss = [&] { return dot(conv_fft_forward(x, spec, w, b, {std::nullopt, false}).output, r); };

  const auto gx = oracle::central_gradient(x.data(), loss, 1e-6);
  const auto gw = oracle::central_gradient(w.data(), loss, 1e-6);
  const auto gb = oracle::central_gradient(b.data(), loss, 1e-6);
  EXPECT_LE(oracle::relative_norm_error(grads.grad_input.data(), gx), 1e-4);
  EXPECT_LE(oracle::relative_norm_error(grads.grad_filters.data(), gw), 1e-4);
  EXPECT_LE(oracle::relative_norm_error(grads.grad_bias.data(), gb), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(
    Policies, ConvGradient,
    ::testing::Values(GradCase{1, 1, NoCompression{}}, GradCase{1, 2, NoCompression{}},
                      GradCase{2, 1, NoCompression{}}, GradCase{2, 2, NoCompression{}},
                      GradCase{1, 1, FixedRate{0.5}}, GradCase{2, 1, FixedRate{0.5}},
                      GradCase{2, 2, FixedRate{0.5}},
                      GradCase{1, 1, PreserveEnergy{0.9, Granularity::coarse}},
                      GradCase{2, 1, PreserveEnergy{0.9, Granularity::coarse}},
                      GradCase{1, 1, PreserveEnergy{0.9, Granularity::fine}},
                      GradCase{1, 1, TopK{3}}, GradCase{2, 1, TopK{3}}));

TEST(ConvFft, ResultsIndependentOfWorkerCount) {
  const ConvSpec spec = make_spec(2, 3, 4, 3, 1, FixedRate{0.3});
  const Tensor x = random_tensor({5, 3, 10, 10}, 30);
  const Tensor w = random_tensor({4, 3, 3, 3}, 31);
  set_worker_count(1);
  const auto a = conv_fft_forward(x, spec, w);
  const Tensor g = random_tensor(a.output.shape(), 32);
  const auto ga = conv_fft_backward(a.cache, g, spec);
  set_worker_count(4);
  const auto b = conv_fft_forward(x, spec, w);
  const auto gb = conv_fft_backward(b.cache, g, spec);
  set_worker_count(1);
  for (std::size_t i = 0; i < a.output.size(); ++i) ASSERT_EQ(a.output[i], b.output[i]);
  for (std::size_t i = 0; i < ga.grad_input.size(); ++i) ASSERT_EQ(ga.grad_input[i], gb.grad_input[i]);
  for (std::size_t i = 0; i < ga.grad_filters.size(); ++i) {
    ASSERT_EQ(ga.grad_filters[i], gb.grad_filters[i]);
  }
}

TEST(OpCount, Examples) {
  // 1 x 1 signal: padded extent 1, half spectrum of one bin.
  const ConvSpec unit = make_spec(1, 1, 1, 1);
  EXPECT_EQ(op_count_estimate(unit, {1, 1}), (std::pair<std::uint64_t, std::uint64_t>{3, 5}));
  EXPECT_EQ(op_count_for_kept(unit, 1, 1), (std::pair<std::uint64_t, std::uint64_t>{3, 5}));

  const ConvSpec a = make_spec(2, 3, 4, 5);
  ConvSpec b = a;
  b.out_channels = 8;
  const auto ca = op_count_estimate(a, {2, 32});
  const auto cb = op_count_estimate(b, {2, 32});
  EXPECT_EQ(cb.first, 2 * ca.first);
  EXPECT_EQ(cb.second, 2 * ca.second);
  EXPECT_EQ(ca.first, 3ull * 2 * 4 * 3 * 59 * 30);
  EXPECT_EQ(ca.second, 5ull * 2 * 4 * 3 * 59 * 30);
}
