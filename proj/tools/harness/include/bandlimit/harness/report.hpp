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
#include <iosfwd>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace bandlimit::harness {

struct EnvironmentStamp {
  std::string precision = "f64";
  std::size_t workers = 1;
  std::uint64_t seed = 0;
};

using NamedValues = std::vector<std::pair<std::string, double>>;

// Table of numeric rows produced by one experiment. The first row fixes the
// column set; later rows must repeat it in the same order. Rows can only be
// appended.
class ExperimentReport {
 public:
  explicit ExperimentReport(std::string id, nlohmann::json parameters = nlohmann::json::object(),
                            EnvironmentStamp env = {});

  const std::string& id() const { return id_; }
  const nlohmann::json& parameters() const { return parameters_; }
  nlohmann::json& parameters() { return parameters_; }
  const EnvironmentStamp& environment() const { return env_; }
  void set_environment(EnvironmentStamp env) { env_ = std::move(env); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }

  void add_row(const NamedValues& row);

  // Value of `column` in row i. Throws ParameterError on an unknown column.
  double value(std::size_t row, const std::string& column) const;
  std::vector<double> column(const std::string& name) const;

  // Free-form results derived from the rows (crossover point, summary
  // statistics). Not part of the CSV output.
  nlohmann::json& summary() { return summary_; }
  const nlohmann::json& summary() const { return summary_; }

  // Header row, '.' decimals, LF line endings; NaN is written as "nan".
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
  // Picks JSON for a .json extension, CSV otherwise.
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t column_index(const std::string& name) const;

  std::string id_;
  nlohmann::json parameters_;
  EnvironmentStamp env_;
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
  nlohmann::json summary_ = nlohmann::json::object();
};

// Shortest text that reads back to the same double.
std::string format_number(double value);

}  // namespace bandlimit::harness
