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

#include "bandlimit/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include "bandlimit/conv_layer.hpp"
#include "bandlimit/errors.hpp"
#include "bandlimit/fft.hpp"
#include "bandlimit/memory_ledger.hpp"
#include "bandlimit/parallel.hpp"

namespace bandlimit::harness {
namespace {

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double l2_distance(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Timing always runs on one worker.
class SingleWorker {
 public:
  SingleWorker() : saved_(worker_count()) { set_worker_count(1); }
  ~SingleWorker() { set_worker_count(saved_); }
  SingleWorker(const SingleWorker&) = delete;
  SingleWorker& operator=(const SingleWorker&) = delete;

 private:
  std::size_t saved_;
};

template <class Fn>
double median_ms(std::size_t repeats, Fn&& fn) {
  fn();  // warm-up
  std::vector<double> times;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  return n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

nlohmann::json policy_list(const std::vector<CompressionPolicy>& policies) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : policies) out.push_back(policy_to_string(p));
  return out;
}

}  // namespace

double relative_error(const Tensor& v, const Tensor& approx) {
  if (v.shape() != approx.shape()) {
    throw DimensionError("relative_error shapes differ: " + shape_string(v.shape()) + " vs " +
                         shape_string(approx.shape()));
  }
  const double ref = l2_norm(v.data());
  const double diff = l2_distance(v, approx);
  if (ref == 0.0) {
    if (diff == 0.0) return 0.0;
    throw UndefinedMetricError("relative error against a zero reference");
  }
  return 100.0 * diff / ref;
}

double normalized_performance(double metric_compressed, double metric_full) {
  if (!(metric_full > 0.0)) throw ParameterError("normalized performance needs a positive baseline");
  return 100.0 * metric_compressed / metric_full;
}

Tensor make_pink_image(std::size_t channels, std::size_t rows, std::size_t cols,
                       std::uint64_t seed) {
  if (channels == 0 || rows == 0 || cols == 0) throw ParameterError("empty image extents");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Tensor image({channels, rows, cols});
  for (std::size_t c = 0; c < channels; ++c) {
    HalfSpectrum s({rows, cols});
    for (std::size_t r = 0; r < rows; ++r) {
      const double fr = static_cast<double>(std::min(r, rows - r));
      for (std::size_t k = 0; k < s.cols(); ++k) {
        const double f = std::hypot(fr, static_cast<double>(k));
        s.at(r, k) = f == 0.0 ? Complex{} : std::polar(1.0 / f, phase(rng));
      }
    }
    auto plane = irfft_2d(s, rows, cols);
    double mean = 0.0;
    for (double x : plane) mean += x;
    mean /= static_cast<double>(plane.size());
    double var = 0.0;
    for (double x : plane) var += (x - mean) * (x - mean);
    const double scale = 1.0 / std::sqrt(std::max(var / static_cast<double>(plane.size()), 1e-300));
    auto dst = image.slice(c);
    for (std::size_t i = 0; i < plane.size(); ++i) dst[i] = (plane[i] - mean) * scale;
  }
  return image;
}

Tensor make_glorot_filter(std::size_t out_channels, std::size_t in_channels, std::size_t kernel,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor w({out_channels, in_channels, kernel, kernel});
  glorot_uniform(w, in_channels * kernel * kernel, out_channels * kernel * kernel, rng);
  return w;
}

ExperimentReport bench_crossover(std::size_t signal_len, const std::vector<std::size_t>& filter_lens,
                                 std::size_t repeats, std::uint64_t seed) {
  if (signal_len == 0) throw ParameterError("signal length must be positive");
  if (repeats < 3) throw ParameterError("crossover timing needs at least 3 repeats");
  for (std::size_t k : filter_lens) {
    if (k == 0 || k > signal_len) throw ParameterError("filter length must be in [1, signal length]");
  }
  SingleWorker single;
  ExperimentReport report("bench-crossover",
                          {{"signal_len", signal_len}, {"filter_lens", filter_lens},
                           {"repeats", repeats}},
                          {"f64", 1, seed});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Tensor x({1, 1, signal_len});
  for (auto& v : x.data()) v = nd(rng);

  nlohmann::json crossover = nullptr;
  for (std::size_t k : filter_lens) {
    Tensor w({1, 1, k});
    for (auto& v : w.data()) v = nd(rng);
    ConvSpec spec;
    spec.kernel_size = k;
    spec.bias = false;
    const ConvForwardOptions opts{std::nullopt, false};

    const Tensor direct = conv_direct(x, w, 1);
    const Tensor fft = conv_fft_forward(x, spec, w, {}, opts).output;
    const double err = relative_error(direct, fft) / 100.0;
    if (!(err <= 1e-6)) {
      throw Error("crossover correctness gate failed at filter length " + std::to_string(k));
    }

    const double direct_ms = median_ms(repeats, [&] { (void)conv_direct(x, w, 1); });
    const double fft_ms =
        median_ms(repeats, [&] { (void)conv_fft_forward(x, spec, w, {}, opts); });
    const bool fft_wins = fft_ms < direct_ms;
    if (fft_wins && crossover.is_null()) crossover = k;
    report.add_row({{"filter_len", static_cast<double>(k)},
                    {"direct_ms", direct_ms},
                    {"fft_ms", fft_ms},
                    {"fft_faster", fft_wins ? 1.0 : 0.0},
                    {"relative_error", err},
                    {"nondeterministic", 1.0}});
  }
  report.summary()["crossover_filter_len"] = crossover;
  return report;
}

std::string error_method_name(ErrorMethod m) {
  return m == ErrorMethod::lead ? "lead" : "fine_topk";
}

ErrorMethod parse_error_method(const std::string& name) {
  if (name == "lead") return ErrorMethod::lead;
  if (name == "fine_topk" || name == "topk") return ErrorMethod::fine_topk;
  throw ConfigError("unknown error-curve method: " + name);
}

ExperimentReport bench_error_curve(const Tensor& image, const Tensor& filter, ErrorMethod method,
                                   std::size_t steps) {
  if (image.rank() != 3 || filter.rank() != 4 || filter.extent(1) != image.extent(0) ||
      filter.extent(2) != filter.extent(3) || image.extent(1) != image.extent(2) ||
      filter.extent(2) > image.extent(1)) {
    throw DimensionError("error curve needs a C x n x n image and an F x C x k x k filter");
  }
  const std::size_t channels = image.extent(0);
  const std::size_t kernel = filter.extent(2);
  const Tensor input = image.reshaped({1, channels, image.extent(1), image.extent(2)});

  ConvSpec spec;
  spec.dims = 2;
  spec.in_channels = channels;
  spec.out_channels = filter.extent(0);
  spec.kernel_size = kernel;
  spec.bias = false;
  const Tensor reference = conv_fft_forward(input, spec, filter, {}, {std::nullopt, false}).output;

  const Shape padded = padded_extents({image.extent(1), image.extent(2)}, kernel);
  const auto sequence = growth_sequence(padded);
  const std::size_t half = sequence.back().half_elements();
  const std::size_t capacity = channels * half;

  ExperimentReport report("bench-error",
                          {{"method", error_method_name(method)},
                           {"steps", steps},
                           {"image_shape", image.shape()},
                           {"filter_shape", filter.shape()},
                           {"padded", padded}});
  for (std::size_t step = 0; step < steps; ++step) {
    ConvSpec s = spec;
    ConvForwardOptions opts;
    double level = 0.0;
    if (method == ErrorMethod::lead) {
      if (step >= sequence.size()) break;
      opts.geometry = sequence[sequence.size() - 1 - step];
      level = static_cast<double>(opts.geometry->kept_elements());
    } else {
      const std::size_t k = step == 0 ? 0 : step == 1 ? 1 : 10 * (step - 1);
      if (k >= capacity) break;
      if (k > 0) s.policy = TopK{k};
      level = static_cast<double>(k);
    }
    const auto result = conv_fft_forward(input, s, filter, {}, opts);
    report.add_row({{"step", static_cast<double>(step)},
                    {"level", level},
                    {"compression_ratio", compression_ratio(result.cache.input_spectra.front())},
                    {"relative_error", relative_error(reference, result.output)},
                    {"absolute_error", l2_distance(reference, result.output)}});
  }
  return report;
}

TrainedModel train_model(const NetworkConfig& cfg, const TrainConfig& tc,
                         const LabeledDataset& train, const LabeledDataset* test, std::ostream* log,
                         std::string label) {
  validate_train_config(tc);
  TrainedModel model;
  model.label = std::move(label);
  model.policy = cfg.policies.empty() ? CompressionPolicy{NoCompression{}} : cfg.policies.front();
  model.seed = tc.seed;
  model.net.emplace(build_network(cfg, tc.seed));
  try {
    for (std::size_t e = 0; e < tc.epochs; ++e) {
      EpochMetrics m = train_epoch(*model.net, train, tc, e);
      if (log) {
        nlohmann::ordered_json row = {{"epoch", m.epoch},
                              {"train_loss", m.loss},
                              {"train_acc", m.accuracy},
                              {"test_acc", nullptr},
                              {"per_layer_compression", nlohmann::ordered_json::array()}};
        if (test) row["test_acc"] = evaluate(*model.net, *test);
        for (const auto& c : m.compression) row["per_layer_compression"].push_back(c.ratio);
        *log << row.dump() << '\n';
      }
      model.history.push_back(std::move(m));
    }
  } catch (const DivergenceError& e) {
    model.net.reset();
    model.failure = e.what();
  }
  return model;
}

CompressionPolicy rate_policy(double rate) {
  if (rate == 0.0) return NoCompression{};
  return FixedRate{rate};
}

ExperimentReport matrix_from_models(const std::vector<double>& rates_train,
                                    const std::vector<TrainedModel*>& models,
                                    const std::vector<double>& rates_infer,
                                    const LabeledDataset& test) {
  if (rates_train.empty() || rates_infer.empty()) throw ParameterError("empty rate list");
  if (rates_train.size() != models.size()) throw ParameterError("one model per training rate");
  ExperimentReport report("matrix", {{"rates_train", rates_train}, {"rates_infer", rates_infer}});
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (double r : rates_infer) {
      const bool failed = !models[i]->net.has_value();
      const double acc =
          failed ? std::nan("")
                 : evaluate(*models[i]->net, test, std::vector<CompressionPolicy>{rate_policy(r)});
      report.add_row({{"train_rate", rates_train[i]},
                      {"infer_rate", r},
                      {"accuracy", acc},
                      {"failed", failed ? 1.0 : 0.0}});
    }
  }
  return report;
}

ExperimentReport matrix_train_infer(const std::vector<double>& rates_train,
                                    const std::vector<double>& rates_infer,
                                    const LabeledDataset& train, const LabeledDataset& test,
                                    const NetworkConfig& cfg, const TrainConfig& tc) {
  if (rates_train.empty() || rates_infer.empty()) throw ParameterError("empty rate list");
  std::vector<TrainedModel> models;
  models.reserve(rates_train.size());
  for (double r : rates_train) {
    NetworkConfig c = cfg;
    c.policies = {rate_policy(r)};
    models.push_back(train_model(c, tc, train, nullptr, nullptr, "rate " + format_number(r)));
  }
  std::vector<TrainedModel*> ptrs;
  for (auto& m : models) ptrs.push_back(&m);
  ExperimentReport report = matrix_from_models(rates_train, ptrs, rates_infer, test);
  report.parameters().update({{"architecture", architecture_name(cfg.architecture)},
                              {"epochs", tc.epochs},
                              {"batch_size", tc.batch_size},
                              {"learning_rate", tc.learning_rate},
                              {"momentum", tc.momentum}});
  report.set_environment({dtype_name(cfg.dtype), worker_count(), tc.seed});
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& m : models) {
    if (!m.failure.empty()) failures.push_back({{"model", m.label}, {"error", m.failure}});
  }
  report.summary()["failures"] = failures;
  return report;
}

std::vector<std::vector<double>> matrix_accuracies(const ExperimentReport& report) {
  const std::size_t width = report.parameters().at("rates_infer").size();
  if (width == 0 || report.row_count() % width != 0) throw ParameterError("malformed matrix report");
  const auto acc = report.column("accuracy");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < acc.size(); i += width) {
    out.emplace_back(acc.begin() + static_cast<std::ptrdiff_t>(i),
                     acc.begin() + static_cast<std::ptrdiff_t>(i + width));
  }
  return out;
}

ExperimentReport noise_sweep(const std::vector<ModelGroup>& groups, const std::vector<double>& sigmas,
                             const LabeledDataset& test, const std::vector<std::uint64_t>& seeds) {
  if (groups.empty() || sigmas.empty() || seeds.empty()) {
    throw ParameterError("noise sweep needs models, sigmas and seeds");
  }
  const Shape geometry = test.example_shape();
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& g : groups) {
    if (g.members.empty()) throw ParameterError("model group " + g.label + " is empty");
    labels.push_back(g.label);
  }
  ExperimentReport report("noise", {{"models", labels}, {"sigmas", sigmas}, {"seeds", seeds}});

  // Noisy copies are shared by every model.
  std::map<std::pair<std::size_t, std::size_t>, LabeledDataset> noisy;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      noisy.emplace(std::pair{si, k}, perturb_gaussian(test, sigmas[si], seeds[k]));
    }
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      std::vector<double> accs;
      for (Network* net : groups[gi].members) {
        for (std::size_t k = 0; k < seeds.size(); ++k) {
          accs.push_back(evaluate(*net, noisy.at({si, k})));
        }
      }
      double mean = 0.0;
      for (double a : accs) mean += a;
      mean /= static_cast<double>(accs.size());
      double var = 0.0;
      for (double a : accs) var += (a - mean) * (a - mean);
      const double sd = accs.size() > 1 ? std::sqrt(var / static_cast<double>(accs.size() - 1)) : 0.0;
      report.add_row({{"group", static_cast<double>(gi)},
                      {"sigma", sigmas[si]},
                      {"accuracy", mean},
                      {"accuracy_std", sd}});
    }
  }
  return report;
}

ExperimentReport memory_report(const NetworkConfig& cfg, const std::vector<CompressionPolicy>& policies,
                               const Tensor& batch, const std::vector<std::size_t>& labels,
                               std::uint64_t seed) {
  if (policies.empty()) throw ParameterError("memory report needs at least one policy");
  ExperimentReport report("memreport",
                          {{"policies", policy_list(policies)},
                           {"batch_shape", batch.shape()},
                           {"architecture", architecture_name(cfg.architecture)}},
                          {dtype_name(cfg.dtype), worker_count(), seed});
  double baseline = 0.0;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    NetworkConfig c = cfg;
    c.policies = {policies[i]};
    Network net = build_network(c, seed);
    auto ledger = std::make_shared<MemoryLedger>();
    ledger->set_event_logging(false);
    {
      LedgerScope scope(ledger);
      const Tensor logits = net.forward(batch, Mode::train);
      const SoftmaxLoss loss = softmax_cross_entropy(logits, labels);
      net.backward(loss.grad);
      net.clear_state();
    }
    const double peak = static_cast<double>(ledger->peak_bytes());
    if (i == 0) baseline = peak;
    report.add_row({{"policy", static_cast<double>(i)},
                    {"peak_bytes", peak},
                    {"normalized", normalized_performance(peak, baseline)}});
  }
  return report;
}

}  // namespace bandlimit::harness
