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

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "bandlimit/errors.hpp"
#include "bandlimit/harness/config.hpp"
#include "bandlimit/harness/experiments.hpp"
#include "bandlimit/harness/ranking.hpp"
#include "bandlimit/harness/report.hpp"
#include "hand_rank.hpp"

using namespace bandlimit;
using namespace bandlimit::harness;

namespace {

Tensor vec(std::vector<double> v) {
  Tensor t({v.size()});
  std::copy(v.begin(), v.end(), t.data().begin());
  return t;
}

}  // namespace

TEST(Report, RowsShareColumns) {
  ExperimentReport r("demo", {{"n", 3}}, {"f32", 2, 7});
  r.add_row({{"a", 1.0}, {"b", 2.0}});
  r.add_row({{"a", 3.0}, {"b", 4.0}});
  EXPECT_THROW(r.add_row({{"a", 1.0}}), ParameterError);
  EXPECT_THROW(r.add_row({{"b", 1.0}, {"a", 2.0}}), ParameterError);
  EXPECT_EQ(r.row_count(), 2u);
  EXPECT_EQ(r.value(1, "b"), 4.0);
  EXPECT_EQ(r.column("a"), (std::vector<double>{1.0, 3.0}));
  EXPECT_THROW(r.value(0, "c"), ParameterError);
}

TEST(Report, CsvFormat) {
  ExperimentReport r("demo");
  r.add_row({{"x", 0.5}, {"y", std::nan("")}});
  r.add_row({{"x", -2.0}, {"y", 1e-20}});
  std::ostringstream os;
  r.write_csv(os);
  const std::string csv = os.str();
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(csv.substr(0, 4), "x,y\n");
  EXPECT_NE(csv.find("0.5,nan\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find("-2,1e-20\n"), std::string::npos) << csv;
}

TEST(Report, JsonCarriesEnvironment) {
  ExperimentReport r("demo", {{"k", "v"}}, {"f32", 4, 11});
  r.add_row({{"x", std::numeric_limits<double>::infinity()}});
  r.summary()["best"] = 2;
  const auto j = r.to_json();
  EXPECT_EQ(j["experiment"], "demo");
  EXPECT_EQ(j["parameters"]["k"], "v");
  EXPECT_EQ(j["environment"]["precision"], "f32");
  EXPECT_EQ(j["environment"]["workers"], 4);
  EXPECT_EQ(j["environment"]["seed"], 11);
  EXPECT_TRUE(j["rows"][0]["x"].is_null());
  EXPECT_EQ(j["summary"]["best"], 2);

  const auto dir = std::filesystem::temp_directory_path();
  r.save(dir / "bandlimit_report.json");
  r.save(dir / "bandlimit_report.csv");
  std::ifstream in(dir / "bandlimit_report.json");
  EXPECT_EQ(nlohmann::json::parse(in)["experiment"], "demo");
  std::ifstream csv(dir / "bandlimit_report.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "x");
}

TEST(Metrics, RelativeError) {
  EXPECT_EQ(relative_error(vec({1, 2, 3}), vec({1, 2, 3})), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(vec({3, 4}), vec({0, 0})), 100.0);
  EXPECT_NEAR(relative_error(vec({1, 0}), vec({1, 0.1})), 10.0, 1e-12);
  EXPECT_EQ(relative_error(vec({0, 0}), vec({0, 0})), 0.0);
  EXPECT_THROW(relative_error(vec({0, 0}), vec({0, 1})), UndefinedMetricError);
  EXPECT_THROW(relative_error(vec({1, 2}), vec({1, 2, 3})), DimensionError);
}

TEST(Metrics, NormalizedPerformance) {
  EXPECT_EQ(normalized_performance(7.0, 7.0), 100.0);
  EXPECT_EQ(normalized_performance(50.0, 100.0), 50.0);
  EXPECT_EQ(normalized_performance(0.0, 3.0), 0.0);
  EXPECT_THROW(normalized_performance(1.0, 0.0), ParameterError);
  EXPECT_THROW(normalized_performance(1.0, -1.0), ParameterError);
}

TEST(Ranking, RankDescendingAveragesTies) {
  const std::vector<double> v{0.9, 0.8, 0.9, 0.1};
  EXPECT_EQ(rank_descending(v), (std::vector<double>{1.5, 3.0, 1.5, 4.0}));
}

TEST(Ranking, IdenticalMethods) {
  const std::vector<std::vector<double>> m(5, std::vector<double>(4, 0.7));
  const auto s = friedman_nemenyi(m);
  for (double r : s.average_ranks) EXPECT_DOUBLE_EQ(r, 2.5);
  EXPECT_NEAR(s.statistic, 0.0, 1e-12);
  ASSERT_EQ(s.groups.size(), 1u);
  EXPECT_EQ(s.groups[0].size(), 4u);
}

TEST(Ranking, UnanimousWinner) {
  const std::vector<std::vector<double>> m{{.9, .5, .4}, {.8, .7, .6}, {.99, .1, .2}, {.7, .6, .65}};
  EXPECT_DOUBLE_EQ(friedman_nemenyi(m).average_ranks[0], 1.0);
}

TEST(Ranking, HandMatrixMatchesOracle) {
  const std::vector<std::vector<double>> m{{.9, .8, .7}, {.85, .8, .75}, {.9, .7, .8}, {.95, .9, .85}};
  const auto s = friedman_nemenyi(m, 0.05, {"a", "b", "c"});
  const auto ranks = oracle::hand_ranks(m);
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(s.ranks[i][j], ranks[i][j], 1e-9);
  }
  const auto avg = oracle::hand_average_ranks(m);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(s.average_ranks[j], avg[j], 1e-9);
  EXPECT_NEAR(s.statistic, oracle::hand_friedman(m), 1e-9);
  EXPECT_NEAR(s.statistic, 6.5, 1e-9);
  EXPECT_NEAR(s.critical_distance, 2.343701 * std::sqrt(12.0 / 24.0), 1e-6);
  EXPECT_EQ(s.methods, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Ranking, InvariantsAndEquivariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 6, k = 2 + trial % 9;
    std::vector<std::vector<double>> m(n, std::vector<double>(k));
    for (auto& row : m) {
      for (auto& v : row) v = std::round(u(rng) * 20) / 20;  // coarse grid forces ties
    }
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto pm = m;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) pm[i][j] = m[i][perm[j]];
    }
    const auto a = friedman_nemenyi(m);
    const auto b = friedman_nemenyi(pm);
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(b.average_ranks[j], a.average_ranks[perm[j]], 1e-12);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-9);
    EXPECT_NEAR(std::accumulate(a.average_ranks.begin(), a.average_ranks.end(), 0.0),
                k * (k + 1) / 2.0, 1e-9);
    std::vector<int> covered(k, 0);
    for (const auto& g : a.groups) {
      for (auto j : g) covered[j] = 1;
    }
    EXPECT_EQ(std::count(covered.begin(), covered.end(), 1), static_cast<long>(k));
  }
}

TEST(Ranking, DegenerateMatrices) {
  EXPECT_THROW(friedman_nemenyi({{0.9, 0.8}}), ParameterError);
  EXPECT_THROW(friedman_nemenyi({{0.9}, {0.8}}), ParameterError);
  EXPECT_THROW(nemenyi_q(11, 0.05), ParameterError);
  EXPECT_THROW(nemenyi_q(3, 0.01), ParameterError);
}

// Range of k standard normals: P(R <= r) = k * int phi(z) (Phi(z + r) - Phi(z))^(k-1) dz.
TEST(Ranking, NemenyiTableMatchesStudentizedRange) {
  const boost::math::normal nd;
  for (double alpha : {0.05, 0.10}) {
    for (std::size_t k = 2; k <= 10; ++k) {
      const double r = nemenyi_q(k, alpha) * std::sqrt(2.0);
      auto f = [&](double z) {
        return static_cast<double>(k) * boost::math::pdf(nd, z) *
               std::pow(boost::math::cdf(nd, z + r) - boost::math::cdf(nd, z), double(k - 1));
      };
      const double p = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -12.0, 12.0, 10, 1e-12);
      EXPECT_NEAR(p, 1.0 - alpha, 2e-6) << "k=" << k << " alpha=" << alpha;
    }
  }
}

TEST(ErrorCurve, EndpointsAndContrast) {
  const Tensor image = make_pink_image(3, 32, 32, 1);
  const Tensor filter = make_glorot_filter(1, 3, 5, 2);
  const auto lead = bench_error_curve(image, filter, ErrorMethod::lead, 100);
  const auto topk = bench_error_curve(image, filter, ErrorMethod::fine_topk, 20);
  ASSERT_GE(lead.row_count(), 3u);
  EXPECT_LE(lead.value(0, "relative_error"), 1e-6);
  EXPECT_LE(topk.value(0, "relative_error"), 1e-6);
  EXPECT_LT(topk.value(1, "relative_error"), 1.0);
  EXPECT_GE(lead.value(1, "relative_error"), 10.0 * topk.value(1, "relative_error"));
  const auto err = lead.column("relative_error");
  EXPECT_GE(err.back(), err[1]);
  const auto ratio = lead.column("compression_ratio");
  EXPECT_TRUE(std::is_sorted(ratio.begin(), ratio.end()));
}

TEST(ErrorCurve, MethodNames) {
  EXPECT_EQ(parse_error_method("lead"), ErrorMethod::lead);
  EXPECT_EQ(parse_error_method("topk"), ErrorMethod::fine_topk);
  EXPECT_EQ(error_method_name(ErrorMethod::fine_topk), "fine_topk");
  EXPECT_THROW(parse_error_method("other"), ConfigError);
}

TEST(Crossover, SmallRun) {
  const auto r = bench_crossover(512, {1, 256}, 3, 1);
  ASSERT_EQ(r.row_count(), 2u);
  for (double e : r.column("relative_error")) EXPECT_LE(e, 1e-6);
  EXPECT_EQ(r.value(0, "fft_faster"), 0.0);
  EXPECT_EQ(r.value(0, "nondeterministic"), 1.0);
  EXPECT_TRUE(r.summary().contains("crossover_filter_len"));
  EXPECT_THROW(bench_crossover(512, {4}, 2), ParameterError);
  EXPECT_THROW(bench_crossover(16, {32}, 3), ParameterError);
}

TEST(Matrix, SingleRateIsOneByOne) {
  const auto data = make_separable_1d(6, 1, 32);
  NetworkConfig cfg;
  cfg.input_extent = 32;
  cfg.classes = 2;
  cfg.scale = 1.0 / 32;
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 8;
  tc.learning_rate = 0.02;
  const auto r = matrix_train_infer({0.5}, {0.5}, data, data, cfg, tc);
  ASSERT_EQ(r.row_count(), 1u);
  const auto acc = matrix_accuracies(r);
  ASSERT_EQ(acc.size(), 1u);
  ASSERT_EQ(acc[0].size(), 1u);
  EXPECT_GE(acc[0][0], 0.0);
  EXPECT_LE(acc[0][0], 100.0);
  EXPECT_EQ(r.value(0, "failed"), 0.0);
}

TEST(Matrix, DivergedRowIsMarkedFailed) {
  const auto data = make_separable_1d(4, 1, 16);
  NetworkConfig cfg;
  cfg.input_extent = 16;
  cfg.classes = 2;
  cfg.scale = 1.0 / 32;
  TrainConfig tc;
  tc.epochs = 3;
  tc.learning_rate = 1e300;
  const auto r = matrix_train_infer({0.0, 0.5}, {0.0}, data, data, cfg, tc);
  ASSERT_EQ(r.row_count(), 2u);
  EXPECT_EQ(r.value(0, "failed"), 1.0);
  EXPECT_TRUE(std::isnan(r.value(0, "accuracy")));
  EXPECT_EQ(r.summary()["failures"].size(), 2u);
}

TEST(Noise, ZeroSigmaIsCleanAccuracy) {
  const auto data = make_cylinder_bell_funnel(6, 3, 64);
  NetworkConfig cfg;
  cfg.input_extent = 64;
  cfg.classes = 3;
  cfg.scale = 1.0 / 32;
  TrainConfig tc;
  tc.epochs = 2;
  auto model = train_model(cfg, tc, data);
  ASSERT_TRUE(model.net);
  const double clean = evaluate(*model.net, data);
  const auto r = noise_sweep({{"m", {&*model.net}}}, {0.0, 50.0}, data, {1, 2});
  ASSERT_EQ(r.row_count(), 2u);
  EXPECT_EQ(r.value(0, "accuracy"), clean);
  EXPECT_EQ(r.value(0, "accuracy_std"), 0.0);
  EXPECT_THROW(noise_sweep({}, {0.0}, data, {1}), ParameterError);
}

TEST(Memory, EnergyPolicyLowersPeak) {
  NetworkConfig cfg;
  cfg.input_extent = 128;
  cfg.classes = 3;
  const auto data = make_cylinder_bell_funnel(4, 1);
  std::vector<std::size_t> idx(8);
  std::iota(idx.begin(), idx.end(), 0);
  const auto r = memory_report(cfg, {NoCompression{}, PreserveEnergy{0.9}}, data.gather(idx),
                               data.gather_labels(idx), 1);
  ASSERT_EQ(r.row_count(), 2u);
  EXPECT_EQ(r.value(0, "normalized"), 100.0);
  EXPECT_GT(r.value(0, "peak_bytes"), 0.0);
  EXPECT_LT(r.value(1, "normalized"), 100.0);
  EXPECT_THROW(memory_report(cfg, {}, data.gather(idx), data.gather_labels(idx), 1), ParameterError);
}

TEST(Config, JsonKeys) {
  RunConfig cfg = default_run_config();
  apply_config_json(nlohmann::json::parse(R"({"epochs": 3, "learning_rate": 0.1, "dataset": "cbf",
      "policies": ["fixed:0.5"], "channels": [4, 8, 4]})"),
                    cfg);
  EXPECT_EQ(cfg.train.epochs, 3u);
  EXPECT_EQ(cfg.train.learning_rate, 0.1);
  EXPECT_EQ(cfg.network.channels, (std::vector<std::size_t>{4, 8, 4}));
  ASSERT_EQ(cfg.network.policies.size(), 1u);
  EXPECT_TRUE(cfg.network.policies[0] == CompressionPolicy{FixedRate{0.5}});
}

TEST(Config, Errors) {
  RunConfig cfg = default_run_config();
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"epoch": 3})"), cfg), ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"epochs": "3"})"), cfg), ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"learning_rate": -0.1})"), cfg),
               ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse("[1]"), cfg), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/config.json"), ConfigError);
  DataConfig d;
  d.dataset = "nope";
  EXPECT_THROW(load_data(d, 1), ConfigError);
  d = DataConfig{};
  d.test_fraction = 1.5;
  EXPECT_THROW(load_data(d, 1), ConfigError);
}

TEST(Config, DataAndFit) {
  DataConfig d;
  d.dataset = "synthetic_control";
  d.per_class = 4;
  const auto [train, test] = load_data(d, 3);
  EXPECT_EQ(train.size() + test.size(), 24u);
  NetworkConfig net;
  fit_network_to_data(net, train);
  EXPECT_EQ(net.input_extent, 60u);
  EXPECT_EQ(net.classes, 6u);
  d.dataset = "bars";
  const auto [bars, unused] = load_data(d, 3);
  fit_network_to_data(net, bars);
  EXPECT_EQ(net.architecture, Architecture::lenet2d);
  EXPECT_EQ(net.input_extent, 16u);
}
