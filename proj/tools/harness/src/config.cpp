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

#include "bandlimit/harness/config.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "bandlimit/errors.hpp"

namespace bandlimit::harness {
namespace {

template <class T>
T get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("config key '" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& v : j) out.push_back(get_count(v, key));
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.train.epochs = 80;
  cfg.train.batch_size = 8;
  cfg.train.learning_rate = 0.02;
  cfg.train.momentum = 0.9;
  return cfg;
}

void apply_config_json(const nlohmann::json& j, RunConfig& cfg) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  NetworkConfig& n = cfg.network;
  TrainConfig& t = cfg.train;
  DataConfig& d = cfg.data;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "architecture") {
        n.architecture = parse_architecture(get<std::string>(v, key));
      } else if (key == "input_channels") {
        n.input_channels = get_count(v, key);
      } else if (key == "input_extent") {
        n.input_extent = get_count(v, key);
      } else if (key == "classes") {
        n.classes = get_count(v, key);
      } else if (key == "scale") {
        n.scale = get<double>(v, key);
      } else if (key == "channels") {
        n.channels = get_counts(v, key);
      } else if (key == "kernels") {
        n.kernels = get_counts(v, key);
      } else if (key == "hidden_units") {
        n.hidden_units = get_count(v, key);
      } else if (key == "policies") {
        if (!v.is_array()) throw ConfigError("config key 'policies' must be an array");
        n.policies.clear();
        for (const auto& p : v) n.policies.push_back(parse_policy(get<std::string>(p, key)));
      } else if (key == "dtype") {
        n.dtype = parse_dtype(get<std::string>(v, key));
      } else if (key == "epochs") {
        t.epochs = get_count(v, key);
      } else if (key == "batch_size") {
        t.batch_size = get_count(v, key);
      } else if (key == "learning_rate") {
        t.learning_rate = get<double>(v, key);
      } else if (key == "momentum") {
        t.momentum = get<double>(v, key);
      } else if (key == "seed") {
        t.seed = get<std::uint64_t>(v, key);
      } else if (key == "dataset") {
        d.dataset = get<std::string>(v, key);
      } else if (key == "per_class") {
        d.per_class = get_count(v, key);
      } else if (key == "test_fraction") {
        d.test_fraction = get<double>(v, key);
      } else if (key == "train_path") {
        d.train_path = get<std::string>(v, key);
      } else if (key == "test_path") {
        d.test_path = get<std::string>(v, key);
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  if (!(t.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  try {
    validate_train_config(t);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(d.test_fraction > 0.0 && d.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (d.train_path.empty() != d.test_path.empty()) {
    throw ConfigError("train_path and test_path go together");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig cfg = default_run_config();
  apply_config_json(j, cfg);
  return cfg;
}

std::pair<LabeledDataset, LabeledDataset> load_data(const DataConfig& data, std::uint64_t seed) {
  if (!data.train_path.empty()) {
    // Each file is parsed on its own first so format errors report the right
    // line; labels are then compacted over both files together.
    const std::string train_text = read_text(data.train_path);
    const std::string test_text = read_text(data.test_path);
    const std::size_t n_train = parse_ucr_text(train_text, LabelMode::compact).size();
    const std::size_t n_test = parse_ucr_text(test_text, LabelMode::compact).size();
    const LabeledDataset joint = parse_ucr_text(train_text + "\n" + test_text, LabelMode::compact);
    if (joint.size() != n_train + n_test) throw FormatError("train and test series lengths differ");
    std::vector<std::size_t> train_idx(n_train), test_idx(n_test);
    std::iota(train_idx.begin(), train_idx.end(), 0);
    std::iota(test_idx.begin(), test_idx.end(), n_train);
    LabeledDataset train = joint.subset(train_idx);
    LabeledDataset test = joint.subset(test_idx);
    train.split = "train";
    test.split = "test";
    return {std::move(train), std::move(test)};
  }
  try {
    return split_dataset(make_named_dataset(data.dataset, data.per_class, seed),
                         data.test_fraction, seed + 1);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

void fit_network_to_data(NetworkConfig& cfg, const LabeledDataset& data) {
  const Shape ex = data.example_shape();
  cfg.input_channels = ex.at(0);
  cfg.input_extent = ex.at(1);
  cfg.classes = data.classes;
  cfg.architecture = ex.size() == 3 ? Architecture::lenet2d : Architecture::fcn1d;
}

}  // namespace bandlimit::harness
