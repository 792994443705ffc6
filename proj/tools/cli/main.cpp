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

// bandlimit: experiment harness for band-limited FFT convolution.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 training divergence.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bandlimit/errors.hpp"
#include "bandlimit/harness/config.hpp"
#include "bandlimit/harness/experiments.hpp"
#include "bandlimit/harness/ranking.hpp"
#include "bandlimit/parallel.hpp"
#include "bandlimit/tensor_io.hpp"

namespace bh = bandlimit::harness;
using bandlimit::CompressionPolicy;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::string precision = "f64";
  std::size_t workers = 1;
  std::string out;
  std::string config;
};

struct TrainFlags {
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<std::string> dataset;
  std::optional<std::size_t> per_class;
  std::string train_csv;
  std::string test_csv;
};

void add_train_flags(CLI::App* app, TrainFlags& f) {
  app->add_option("--epochs", f.epochs, "Training epochs");
  app->add_option("--batch-size", f.batch_size, "Mini-batch size");
  app->add_option("--lr", f.learning_rate, "Learning rate");
  app->add_option("--dataset", f.dataset,
                  "Synthetic dataset: cbf, synthetic_control, two_patterns, separable, bars");
  app->add_option("--per-class", f.per_class, "Generated series per class");
  app->add_option("--train-csv", f.train_csv, "UCR-style training file");
  app->add_option("--test-csv", f.test_csv, "UCR-style test file");
}

bh::RunConfig resolve_run(const Globals& g, const TrainFlags& f) {
  bh::RunConfig cfg = g.config.empty() ? bh::default_run_config() : bh::load_run_config(g.config);
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.batch_size) cfg.train.batch_size = *f.batch_size;
  if (f.learning_rate) cfg.train.learning_rate = *f.learning_rate;
  if (f.dataset) cfg.data.dataset = *f.dataset;
  if (f.per_class) cfg.data.per_class = *f.per_class;
  if (!f.train_csv.empty() || !f.test_csv.empty()) {
    cfg.data.train_path = f.train_csv;
    cfg.data.test_path = f.test_csv;
  }
  if (cfg.data.train_path.empty() != cfg.data.test_path.empty()) {
    throw bandlimit::ConfigError("--train-csv and --test-csv go together");
  }
  if (!(cfg.train.learning_rate > 0.0)) throw bandlimit::ConfigError("learning rate must be positive");
  cfg.train.seed = g.seed;
  cfg.network.dtype = bandlimit::parse_dtype(g.precision);
  return cfg;
}

bh::EnvironmentStamp stamp(const Globals& g) { return {g.precision, g.workers, g.seed}; }

void emit(const bh::ExperimentReport& report, const Globals& g) {
  if (g.out.empty()) {
    report.write_csv(std::cout);
    if (!report.summary().empty()) std::cerr << report.summary().dump() << '\n';
  } else {
    report.save(g.out);
  }
}

// CSV with a header of method names and one row of scores per dataset. A
// leading non-numeric column (dataset names) is skipped.
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_score_table(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bandlimit::ConfigError("cannot read " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      cells.push_back(cell);
    }
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw bandlimit::FormatError(path + ": empty score table");
  std::vector<std::string> header = split(line);
  std::vector<std::vector<double>> rows;
  bool skip_first = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \r") == std::string::npos) continue;
    auto cells = split(line);
    if (rows.empty()) {
      try {
        (void)std::stod(cells.at(0));
      } catch (const std::exception&) {
        skip_first = true;
      }
    }
    std::vector<double> row;
    for (std::size_t i = skip_first ? 1 : 0; i < cells.size(); ++i) {
      try {
        row.push_back(std::stod(cells[i]));
      } catch (const std::exception&) {
        throw bandlimit::FormatError(path + ":" + std::to_string(line_no) + ": bad number '" +
                                     cells[i] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (skip_first && !header.empty()) header.erase(header.begin());
  return {header, rows};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Band-limited FFT convolution experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for data, initialization and noise");
  app.add_option("--precision", g.precision, "Element type")->check(CLI::IsMember({"f32", "f64"}));
  app.add_option("--workers", g.workers, "Worker threads for layer-internal parallelism")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Report path (.json for JSON, CSV otherwise)");
  app.add_option("--config", g.config, "JSON run config");

  auto* crossover = app.add_subcommand("bench-crossover", "Direct vs FFT convolution timing");
  std::size_t signal_len = 4096;
  std::vector<std::size_t> filter_lens{1, 4, 16, 64, 256, 512, 1024, 2048};
  std::size_t repeats = 5;
  crossover->add_option("--signal-len", signal_len, "Signal length");
  crossover->add_option("--filters", filter_lens, "Filter lengths")->delimiter(',');
  crossover->add_option("--repeats", repeats, "Timed repeats per point");

  auto* error = app.add_subcommand("bench-error", "Convolution error vs compression");
  std::string method = "lead";
  std::size_t steps = 40;
  std::size_t image_size = 32;
  std::size_t channels = 3;
  std::size_t kernel = 5;
  std::string image_path;
  error->add_option("--method", method, "lead or topk");
  error->add_option("--steps", steps, "Compression levels");
  error->add_option("--size", image_size, "Generated image extent");
  error->add_option("--channels", channels, "Generated image channels");
  error->add_option("--kernel", kernel, "Filter extent");
  error->add_option("--image", image_path, "C x n x n BLT1 image instead of a generated one");

  auto* train = app.add_subcommand("train", "Train one network and log per-epoch metrics");
  TrainFlags train_flags;
  add_train_flags(train, train_flags);
  std::vector<std::string> policy_texts;
  std::string log_path;
  train->add_option("--policy", policy_texts,
                    "Compression policy, once or per conv layer (none, fixed:R, energy:F[:fine], topk:K)");
  train->add_option("--log", log_path, "Per-epoch JSON lines (stdout when omitted)");

  auto* matrix = app.add_subcommand("matrix", "Train/inference compression matrix");
  TrainFlags matrix_flags;
  add_train_flags(matrix, matrix_flags);
  std::vector<double> train_rates{0.0, 0.5, 0.85};
  std::vector<double> infer_rates{0.0, 0.25, 0.5, 0.75, 0.85};
  matrix->add_option("--train-rates", train_rates, "Training rates")->delimiter(',');
  matrix->add_option("--infer-rates", infer_rates, "Inference rates")->delimiter(',');

  auto* noise = app.add_subcommand("noise", "Accuracy under Gaussian input noise");
  TrainFlags noise_flags;
  add_train_flags(noise, noise_flags);
  std::vector<double> noise_rates{0.0, 0.85};
  std::vector<double> sigmas{0.0, 0.5, 1.0, 2.0};
  std::size_t model_seeds = 5;
  std::size_t noise_seeds = 3;
  noise->add_option("--train-rates", noise_rates, "Training rate per model group")->delimiter(',');
  noise->add_option("--sigmas", sigmas, "Noise levels")->delimiter(',');
  noise->add_option("--model-seeds", model_seeds, "Models trained per rate");
  noise->add_option("--noise-seeds", noise_seeds, "Noise draws per model and sigma");

  auto* rank = app.add_subcommand("rank", "Friedman test with Nemenyi post-hoc groups");
  std::string scores_path;
  double alpha = 0.05;
  rank->add_option("--input", scores_path, "CSV: header of method names, one row per dataset")
      ->required();
  rank->add_option("--alpha", alpha, "0.05 or 0.10");

  auto* memreport = app.add_subcommand("memreport", "Ledger peak of one training step per policy");
  TrainFlags mem_flags;
  add_train_flags(memreport, mem_flags);
  std::vector<std::string> mem_policies{"none", "energy:0.9"};
  std::size_t mem_batch = 16;
  memreport->add_option("--policies", mem_policies, "Policies to compare")->delimiter(',');
  memreport->add_option("--batch", mem_batch, "Batch size of the measured step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    bandlimit::set_worker_count(g.workers);

    if (*crossover) {
      auto report = bh::bench_crossover(signal_len, filter_lens, repeats, g.seed);
      emit(report, g);
    } else if (*error) {
      const bh::ErrorMethod m = bh::parse_error_method(method);
      bandlimit::Tensor image = image_path.empty()
                                    ? bh::make_pink_image(channels, image_size, image_size, g.seed)
                                    : bandlimit::load_raw_tensor(image_path);
      const std::size_t c = image.rank() == 3 ? image.extent(0) : channels;
      const auto filter = bh::make_glorot_filter(1, c, kernel, g.seed + 1);
      auto report = bh::bench_error_curve(image, filter, m, steps);
      report.set_environment(stamp(g));
      emit(report, g);
    } else if (*train) {
      bh::RunConfig cfg = resolve_run(g, train_flags);
      auto [tr, te] = bh::load_data(cfg.data, g.seed);
      bh::fit_network_to_data(cfg.network, tr);
      if (!policy_texts.empty()) {
        cfg.network.policies.clear();
        for (const auto& p : policy_texts) cfg.network.policies.push_back(bandlimit::parse_policy(p));
      }
      std::ofstream log_file;
      std::ostream* log = &std::cout;
      if (!log_path.empty()) {
        log_file.open(log_path);
        if (!log_file) throw bandlimit::ConfigError("cannot open " + log_path);
        log = &log_file;
      }
      auto model = bh::train_model(cfg.network, cfg.train, tr, &te, log, "train");
      if (!model.net) throw bandlimit::DivergenceError(model.failure);
      bh::ExperimentReport report("train",
                                  {{"dataset", cfg.data.dataset},
                                   {"epochs", cfg.train.epochs},
                                   {"batch_size", cfg.train.batch_size},
                                   {"learning_rate", cfg.train.learning_rate},
                                   {"momentum", cfg.train.momentum}},
                                  stamp(g));
      for (const auto& m : model.history) {
        report.add_row({{"epoch", static_cast<double>(m.epoch)},
                        {"train_loss", m.loss},
                        {"train_acc", m.accuracy}});
      }
      report.summary()["test_acc"] = bandlimit::evaluate(*model.net, te);
      if (!g.out.empty()) report.save(g.out);
    } else if (*matrix) {
      bh::RunConfig cfg = resolve_run(g, matrix_flags);
      auto [tr, te] = bh::load_data(cfg.data, g.seed);
      bh::fit_network_to_data(cfg.network, tr);
      auto report = bh::matrix_train_infer(train_rates, infer_rates, tr, te, cfg.network, cfg.train);
      report.parameters()["dataset"] = cfg.data.dataset;
      emit(report, g);
    } else if (*noise) {
      bh::RunConfig cfg = resolve_run(g, noise_flags);
      auto [tr, te] = bh::load_data(cfg.data, g.seed);
      bh::fit_network_to_data(cfg.network, tr);
      std::vector<bh::TrainedModel> models;
      models.reserve(noise_rates.size() * model_seeds);
      std::vector<bh::ModelGroup> groups;
      for (double r : noise_rates) {
        bh::ModelGroup group{"rate " + bh::format_number(r), {}};
        for (std::size_t s = 0; s < model_seeds; ++s) {
          bandlimit::NetworkConfig nc = cfg.network;
          nc.policies = {bh::rate_policy(r)};
          bandlimit::TrainConfig tc = cfg.train;
          tc.seed = g.seed + s;
          models.push_back(bh::train_model(nc, tc, tr));
          if (!models.back().net) throw bandlimit::DivergenceError(models.back().failure);
          group.members.push_back(&*models.back().net);
        }
        groups.push_back(std::move(group));
      }
      std::vector<std::uint64_t> seeds;
      for (std::size_t s = 0; s < noise_seeds; ++s) seeds.push_back(g.seed + 1000 + s);
      auto report = bh::noise_sweep(groups, sigmas, te, seeds);
      report.parameters()["dataset"] = cfg.data.dataset;
      report.parameters()["train_rates"] = noise_rates;
      report.set_environment(stamp(g));
      emit(report, g);
    } else if (*rank) {
      auto [methods, scores] = read_score_table(scores_path);
      const auto summary = bh::friedman_nemenyi(scores, alpha, methods);
      bh::ExperimentReport report("rank", {{"input", scores_path}, {"alpha", alpha}}, stamp(g));
      for (std::size_t j = 0; j < summary.methods.size(); ++j) {
        report.add_row({{"method", static_cast<double>(j)}, {"average_rank", summary.average_ranks[j]}});
      }
      report.summary() = {{"methods", summary.methods},
                          {"statistic", summary.statistic},
                          {"p_value", summary.p_value},
                          {"critical_distance", summary.critical_distance},
                          {"groups", summary.groups}};
      emit(report, g);
    } else if (*memreport) {
      bh::RunConfig cfg = resolve_run(g, mem_flags);
      auto [tr, te] = bh::load_data(cfg.data, g.seed);
      bh::fit_network_to_data(cfg.network, tr);
      std::vector<CompressionPolicy> policies;
      for (const auto& p : mem_policies) policies.push_back(bandlimit::parse_policy(p));
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < std::min(mem_batch, tr.size()); ++i) idx.push_back(i);
      auto report = bh::memory_report(cfg.network, policies, tr.gather(idx), tr.gather_labels(idx),
                                      g.seed);
      emit(report, g);
    }
  } catch (const bandlimit::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const bandlimit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bandlimit::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
