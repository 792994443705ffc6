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

#include <cstring>
#include <random>
#include <sstream>
#include <thread>

#include "bandlimit/errors.hpp"
#include "bandlimit/fft.hpp"
#include "bandlimit/tensor.hpp"
#include "bandlimit/tensor_io.hpp"

using namespace bandlimit;

TEST(Tensor, CreateFilled) {
  const Tensor t = tensor_create({2, 2}, 0.0);
  ASSERT_EQ(t.shape(), (Shape{2, 2}));
  for (double v : t.data()) EXPECT_EQ(v, 0.0);
}

TEST(Tensor, CreateFromValues) {
  const Tensor t = tensor_create({3}, std::vector<double>{1, 2, 3});
  EXPECT_EQ(t[0], 1.0);
  EXPECT_EQ(t[1], 2.0);
  EXPECT_EQ(t[2], 3.0);
}

TEST(Tensor, LengthMismatchIsDimensionError) {
  EXPECT_THROW(tensor_create({2}, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST(Tensor, ZeroExtentRejected) {
  EXPECT_THROW(tensor_create({2, 0}, 1.0), DimensionError);
}

TEST(Tensor, MultiIndexRoundTrip) {
  Tensor t({2, 3, 4});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * 0.5;
  EXPECT_EQ(t.at({1, 2, 3}), 23 * 0.5);
  EXPECT_EQ(t.offset({1, 0, 2}), 14u);
  EXPECT_THROW(t.at({2, 0, 0}), DimensionError);
}

TEST(Tensor, F32RoundsOnStore) {
  const Tensor t = tensor_create({1}, std::vector<double>{0.1}, DType::f32);
  EXPECT_EQ(t[0], static_cast<double>(0.1f));
  EXPECT_EQ(t.payload_bytes(), 4u);
}

TEST(Ledger, PeakOverHistory) {
  MemoryLedger ledger;
  ledger.allocate("a", 100);
  ledger.release("a", 100);
  ledger.allocate("b", 50);
  EXPECT_EQ(ledger_peak(ledger), 100u);
  EXPECT_EQ(ledger.live_bytes(), 50u);
}

TEST(Ledger, EmptyPeakIsZero) {
  MemoryLedger ledger;
  EXPECT_EQ(ledger_peak(ledger), 0u);
}

TEST(Ledger, TensorAccountingAndConservation) {
  auto ledger = std::make_shared<MemoryLedger>();
  {
    const Tensor a({10}, 0.0, DType::f64, ledger);
    EXPECT_EQ(ledger->live_bytes(), 80u);
    const Tensor b({10}, 0.0, DType::f32, ledger);
    EXPECT_EQ(ledger->live_bytes(), 120u);
    Tensor c = a;  // copies charge again
    EXPECT_EQ(ledger->live_bytes(), 200u);
    Tensor d = std::move(c);
    EXPECT_EQ(ledger->live_bytes(), 200u);
  }
  EXPECT_EQ(ledger->live_bytes(), 0u);
  EXPECT_EQ(ledger->peak_bytes(), 200u);
  std::int64_t sum = 0;
  for (const auto& e : ledger->events()) sum += e.delta_bytes;
  EXPECT_EQ(sum, 0);
}

TEST(Ledger, SpectraAreTwiceRealElementSize) {
  auto ledger = std::make_shared<MemoryLedger>();
  const HalfSpectrum s({8}, ledger);  // 5 complex bins
  EXPECT_EQ(ledger->live_bytes(), 5u * 16u);
}

TEST(Ledger, ScopeInstallsDefault) {
  auto ledger = std::make_shared<MemoryLedger>();
  {
    LedgerScope scope(ledger);
    const Tensor t({4});
    EXPECT_EQ(ledger->live_bytes(), 32u);
  }
  EXPECT_EQ(ledger->live_bytes(), 0u);
  const Tensor outside({4});
  EXPECT_EQ(ledger->live_bytes(), 0u);
}

TEST(Ledger, ConcurrentUpdatesBalance) {
  MemoryLedger ledger;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 1000; ++i) {
        ledger.allocate("x", 8);
        EXPECT_GE(ledger.peak_bytes(), ledger.live_bytes());
        ledger.release("x", 8);
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(ledger.live_bytes(), 0u);
  EXPECT_LE(ledger.peak_bytes(), 32u);
}

TEST(RawTensor, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (DType dt : {DType::f64, DType::f32}) {
    Tensor t({3, 4, 5}, 0.0, dt);
    for (auto& v : t.data()) v = nd(rng);
    t.round_to_dtype();
    std::stringstream buf;
    write_raw_tensor(buf, t);
    const std::string bytes = buf.str();
    EXPECT_EQ(bytes.substr(0, 4), "BLT1");
    EXPECT_EQ(bytes.size(), 4u + 2u + 3u * 4u + t.size() * element_size(dt));
    const Tensor back = read_raw_tensor(buf);
    ASSERT_EQ(back.shape(), t.shape());
    EXPECT_EQ(back.dtype(), dt);
    EXPECT_EQ(std::memcmp(back.data().data(), t.data().data(), t.size() * sizeof(double)), 0);
  }
}

TEST(RawTensor, BadMagicIsFormatError) {
  std::stringstream buf("BLT2\x02\x01\x01\x00\x00\x00");
  EXPECT_THROW(read_raw_tensor(buf), FormatError);
}

TEST(RawTensor, TruncatedPayloadIsFormatError) {
  Tensor t({4}, 1.0);
  std::stringstream buf;
  write_raw_tensor(buf, t);
  std::string bytes = buf.str();
  bytes.resize(bytes.size() - 3);
  std::stringstream cut(bytes);
  EXPECT_THROW(read_raw_tensor(cut), FormatError);
}
