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

#include <cmath>

#include "bandlimit/errors.hpp"
#include "bandlimit/network.hpp"
#include "finite_diff.hpp"

using namespace bandlimit;

namespace {

NetworkConfig fcn_config(std::size_t extent, std::size_t classes,
                         std::vector<CompressionPolicy> policies = {NoCompression{}}) {
  NetworkConfig cfg;
  cfg.input_extent = extent;
  cfg.classes = classes;
  cfg.policies = std::move(policies);
  return cfg;
}

TrainConfig desk_train(std::uint64_t seed = 1) {
  TrainConfig tc;
  tc.learning_rate = 0.02;
  tc.batch_size = 8;
  tc.seed = seed;
  return tc;
}

}  // namespace

TEST(BuildNetwork, FcnParameterCount) {
  const auto cfg = resolve_config(fcn_config(32, 2));
  EXPECT_EQ(cfg.channels, (std::vector<std::size_t>{16, 32, 16}));
  EXPECT_EQ(cfg.kernels, (std::vector<std::size_t>{8, 5, 3}));
  const Network net = build_network(cfg, 1);
  const std::size_t expected = (16 * 1 * 8 + 16) + (32 * 16 * 5 + 32) + (16 * 32 * 3 + 16) + (2 * 16 + 2);
  EXPECT_EQ(net.parameter_count(), expected);
  EXPECT_EQ(net.conv_layers().size(), 3u);
}

TEST(BuildNetwork, SeedDeterminesParameters) {
  const auto cfg = fcn_config(32, 3);
  EXPECT_EQ(build_network(cfg, 5).parameter_checksum(), build_network(cfg, 5).parameter_checksum());
  EXPECT_NE(build_network(cfg, 5).parameter_checksum(), build_network(cfg, 6).parameter_checksum());
}

TEST(BuildNetwork, ConfigErrors) {
  EXPECT_THROW(build_network(fcn_config(5, 2), 1), ConfigError);
  auto cfg = fcn_config(32, 2);
  cfg.classes = 1;
  EXPECT_THROW(resolve_config(cfg), ConfigError);
  cfg = fcn_config(32, 2, {NoCompression{}, NoCompression{}});
  EXPECT_THROW(resolve_config(cfg), ConfigError);
  cfg = fcn_config(32, 2);
  cfg.kernels = {8, 5};
  EXPECT_THROW(resolve_config(cfg), ConfigError);
  NetworkConfig lenet;
  lenet.architecture = Architecture::lenet2d;
  lenet.input_extent = 8;  // 8 -> 4 -> 2 -> 1 leaves no room for the second 5x5 conv
  EXPECT_THROW(resolve_config(lenet), ConfigError);
}

TEST(BuildNetwork, LenetShapes) {
  NetworkConfig cfg;
  cfg.architecture = Architecture::lenet2d;
  cfg.input_extent = 28;
  cfg.classes = 10;
  Network net = build_network(cfg, 2);
  const Tensor x({3, 1, 28, 28}, 0.5);
  const Tensor y = net.forward(x, Mode::infer);
  EXPECT_EQ(y.shape(), (Shape{3, 10}));
}

TEST(Network, GradientsMatchFiniteDifferences) {
  for (const auto& policy : std::vector<CompressionPolicy>{NoCompression{}, FixedRate{0.5}}) {
    NetworkConfig cfg = fcn_config(12, 3, {policy});
    cfg.channels = {2, 3, 2};
    Network net = build_network(cfg, 3);
    const LabeledDataset data = make_separable_1d(2, 4, 12);
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const Tensor x = data.gather(idx);
    std::vector<std::size_t> labels = data.gather_labels(idx);
    for (auto& l : labels) l %= 3;

    // Zero biases put outputs over all-zero receptive fields exactly on the
    // ReLU kink, where central differences are meaningless.
    for (Parameter* p : net.parameters()) {
      if (p->name == "bias") {
        for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] = 0.05 * double(i + 1);
      }
    }
    const SoftmaxLoss l = softmax_cross_entropy(net.forward(x, Mode::train), labels);
    net.backward(l.grad);
    auto loss = [&] { return softmax_cross_entropy(net.forward(x, Mode::infer), labels).loss; };
    for (Parameter* p : net.parameters()) {
      const std::vector<double> analytic(p->grad.data().begin(), p->grad.data().end());
      const auto numeric = oracle::central_gradient(p->value.data(), loss, 1e-6);
      EXPECT_LE(oracle::relative_norm_error(analytic, numeric), 1e-4)
          << p->name << " " << p->value.size() << " " << policy_to_string(policy);
    }
  }
}

TEST(TrainEpoch, ZeroLearningRateLeavesParameters) {
  const auto data = make_separable_1d(10, 1, 32);
  Network net = build_network(fcn_config(32, 2), 1);
  const auto before = net.parameter_checksum();
  TrainConfig tc = desk_train();
  tc.learning_rate = 0.0;
  const auto m = train_epoch(net, data, tc, 0);
  EXPECT_EQ(net.parameter_checksum(), before);
  EXPECT_NEAR(m.loss, evaluate_full(net, data).loss, 1e-12);
}

TEST(TrainEpoch, InitialLossNearLogClasses) {
  for (std::size_t classes : {2u, 3u, 6u}) {
    LabeledDataset data = make_synthetic_control(10, 2);
    for (auto& l : data.labels) l %= classes;
    data.classes = classes;
    Network net = build_network(fcn_config(60, classes), 7);
    const double loss = evaluate_full(net, data).loss;
    EXPECT_NEAR(loss / std::log(static_cast<double>(classes)), 1.0, 0.15) << classes;
  }
}

TEST(TrainEpoch, SeparableDataIsLearned) {
  const auto data = make_separable_1d(20, 3, 32);
  double acc[2] = {0, 0};
  int i = 0;
  for (const auto& policy : std::vector<CompressionPolicy>{NoCompression{}, FixedRate{0.5}}) {
    Network net = build_network(fcn_config(32, 2, {policy}), 4);
    const TrainConfig tc = desk_train(4);
    EpochMetrics m;
    for (std::size_t e = 0; e < 20; ++e) m = train_epoch(net, data, tc, e);
    acc[i++] = m.accuracy;
  }
  EXPECT_GE(acc[0], 95.0);
  EXPECT_LE(std::abs(acc[0] - acc[1]), 10.0);
}

TEST(TrainEpoch, DeterministicLossSequence) {
  const auto data = make_cylinder_bell_funnel(4, 5, 64);
  std::vector<double> runs[2];
  for (auto& losses : runs) {
    Network net = build_network(fcn_config(64, 3, {PreserveEnergy{0.9}}), 8);
    for (std::size_t e = 0; e < 3; ++e) losses.push_back(train_epoch(net, data, desk_train(8), e).loss);
  }
  EXPECT_EQ(runs[0], runs[1]);
}

TEST(TrainEpoch, CompressionTraceRows) {
  const auto data = make_cylinder_bell_funnel(4, 6, 64);
  Network net = build_network(fcn_config(64, 3, {PreserveEnergy{0.9}}), 9);
  CompressionTrace trace;
  for (std::size_t e = 0; e < 4; ++e) trace.push_back(train_epoch(net, data, desk_train(9), e).compression);
  ASSERT_EQ(trace.size(), 4u);
  for (const auto& row : trace) {
    ASSERT_EQ(row.size(), 3u);
    for (const auto& c : row) {
      EXPECT_GE(c.ratio, 0.0);
      EXPECT_LT(c.ratio, 100.0);
      EXPECT_GT(c.kept, 0.0);
    }
  }
}

TEST(TrainEpoch, DivergenceIsReported) {
  const auto data = make_separable_1d(4, 1, 16);
  Network net = build_network(fcn_config(16, 2), 1);
  TrainConfig tc = desk_train();
  tc.learning_rate = 1e300;
  EXPECT_THROW(
      {
        for (std::size_t e = 0; e < 5; ++e) train_epoch(net, data, tc, e);
      },
      DivergenceError);
}

TEST(TrainConfigValidation, Rejects) {
  TrainConfig tc;
  tc.batch_size = 0;
  EXPECT_THROW(validate_train_config(tc), ConfigError);
  tc = TrainConfig{};
  tc.momentum = 1.0;
  EXPECT_THROW(validate_train_config(tc), ConfigError);
  tc = TrainConfig{};
  tc.learning_rate = -1.0;
  EXPECT_THROW(validate_train_config(tc), ConfigError);
}

TEST(Evaluate, SideEffectFreeAndRepeatable) {
  const auto data = make_cylinder_bell_funnel(5, 3, 64);
  Network net = build_network(fcn_config(64, 3, {FixedRate{0.5}}), 10);
  train_epoch(net, data, desk_train(), 0);
  const auto sum = net.parameter_checksum();
  const double a = evaluate(net, data);
  const double b = evaluate(net, data);
  EXPECT_EQ(a, b);
  EXPECT_EQ(net.parameter_checksum(), sum);
  const double same = evaluate(net, data, std::vector<CompressionPolicy>{FixedRate{0.5}});
  EXPECT_EQ(same, a);
  (void)evaluate(net, data, std::vector<CompressionPolicy>{FixedRate{0.85}});
  EXPECT_EQ(evaluate(net, data), a);
  for (auto* conv : net.conv_layers()) EXPECT_TRUE(conv->cache().empty());
}

TEST(Evaluate, IncompatibleOverrideIsConfigError) {
  const auto data = make_cylinder_bell_funnel(2, 3, 64);
  Network net = build_network(fcn_config(64, 3), 11);
  EXPECT_THROW(evaluate(net, data, std::vector<CompressionPolicy>{NoCompression{}, NoCompression{}}),
               ConfigError);
  EXPECT_THROW(evaluate(net, data, std::vector<CompressionPolicy>{TopK{100000}}), ConfigError);
}
