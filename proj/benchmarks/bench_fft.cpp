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
#include <vector>

#include "bandlimit/fft.hpp"

namespace {

std::vector<double> random_signal(std::size_t n) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> nd;
  std::vector<double> x(n);
  for (auto& v : x) v = nd(rng);
  return x;
}

void BM_Rfft1d(benchmark::State& state) {
  const auto x = random_signal(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto s = bandlimit::rfft_1d(x);
    benchmark::DoNotOptimize(s.coeffs().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
// Powers of two, smooth lengths, Rader primes and a Bluestein prime.
BENCHMARK(BM_Rfft1d)->Arg(256)->Arg(262)->Arg(257)->Arg(259)->Arg(4096)->Arg(8191)->Arg(4099);

void BM_RoundTrip1d(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto x = random_signal(n);
  for (auto _ : state) {
    auto y = bandlimit::irfft_1d(bandlimit::rfft_1d(x), n);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_RoundTrip1d)->Arg(128)->Arg(259);

void BM_Rfft2d(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto x = random_signal(n * n);
  for (auto _ : state) {
    auto s = bandlimit::rfft_2d(x, n, n);
    benchmark::DoNotOptimize(s.coeffs().data());
  }
}
BENCHMARK(BM_Rfft2d)->Arg(32)->Arg(59)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
