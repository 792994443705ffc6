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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "bandlimit/dataset.hpp"
#include "bandlimit/network.hpp"

namespace bandlimit::harness {

// Where the data comes from: a named synthetic generator or a pair of
// UCR-style files.
struct DataConfig {
  std::string dataset = "cbf";
  std::size_t per_class = 50;
  double test_fraction = 0.5;
  std::string train_path;
  std::string test_path;
};

struct RunConfig {
  NetworkConfig network;
  TrainConfig train;
  DataConfig data;
};

// Settings that keep desk-scale runs short while still converging.
RunConfig default_run_config();

// Overlays a JSON object whose keys mirror the config field names
// (lower_snake_case). Unknown keys and wrong types throw ConfigError.
void apply_config_json(const nlohmann::json& j, RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

// Loads or generates the train and test splits. Generators use `seed`; file
// data keeps the file order.
std::pair<LabeledDataset, LabeledDataset> load_data(const DataConfig& data, std::uint64_t seed);

// Copies the input geometry and class count of the data into the network
// config, picking LeNet2D for image data.
void fit_network_to_data(NetworkConfig& cfg, const LabeledDataset& data);

}  // namespace bandlimit::harness
