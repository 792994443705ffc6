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

#include <benchmark/benchmark.h>

#include <random>

#include "bandlimit/conv_layer.hpp"

namespace {

using bandlimit::ConvSpec;
using bandlimit::Tensor;

Tensor random_tensor(bandlimit::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = nd(rng);
  return t;
}

// Single-channel 1D convolution of a 4096 signal; args: filter length.
void BM_Direct1d(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({1, 1, 4096}, 1);
  const Tensor w = random_tensor({1, 1, k}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(bandlimit::conv_direct(x, w, 1).data().data());
}
BENCHMARK(BM_Direct1d)->Arg(1)->Arg(64)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_Fft1d(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({1, 1, 4096}, 1);
  const Tensor w = random_tensor({1, 1, k}, 2);
  ConvSpec spec;
  spec.kernel_size = k;
  spec.bias = false;
  for (auto _ : state) {
    auto r = bandlimit::conv_fft_forward(x, spec, w, {}, {std::nullopt, false});
    benchmark::DoNotOptimize(r.output.data().data());
  }
}
BENCHMARK(BM_Fft1d)->Arg(1)->Arg(64)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

// One FCN-sized layer (16 -> 32 channels, K = 5, L = 128) at several rates.
void BM_FcnLayerForward(benchmark::State& state) {
  const Tensor x = random_tensor({16, 16, 132}, 3);
  const Tensor w = random_tensor({32, 16, 5}, 4);
  ConvSpec spec;
  spec.in_channels = 16;
  spec.out_channels = 32;
  spec.kernel_size = 5;
  spec.bias = false;
  if (state.range(0) > 0) spec.policy = bandlimit::FixedRate{static_cast<double>(state.range(0)) / 100.0};
  for (auto _ : state) {
    auto r = bandlimit::conv_fft_forward(x, spec, w, {}, {std::nullopt, false});
    benchmark::DoNotOptimize(r.output.data().data());
  }
}
BENCHMARK(BM_FcnLayerForward)->Arg(0)->Arg(50)->Arg(85)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
