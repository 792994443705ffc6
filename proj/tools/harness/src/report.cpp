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

#include "bandlimit/harness/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "bandlimit/errors.hpp"

namespace bandlimit::harness {

ExperimentReport::ExperimentReport(std::string id, nlohmann::json parameters,
                                   EnvironmentStamp env)
    : id_(std::move(id)), parameters_(std::move(parameters)), env_(std::move(env)) {}

void ExperimentReport::add_row(const NamedValues& row) {
  if (row.empty()) throw ParameterError("report row has no columns");
  if (rows_.empty()) {
    for (const auto& [name, v] : row) columns_.push_back(name);
  } else {
    bool same = row.size() == columns_.size();
    for (std::size_t i = 0; same && i < row.size(); ++i) same = row[i].first == columns_[i];
    if (!same) throw ParameterError("report row columns differ from the header");
  }
  std::vector<double> values;
  values.reserve(row.size());
  for (const auto& [name, v] : row) values.push_back(v);
  rows_.push_back(std::move(values));
}

std::size_t ExperimentReport::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw ParameterError("unknown report column: " + name);
}

double ExperimentReport::value(std::size_t row, const std::string& column) const {
  return rows_.at(row)[column_index(column)];
}

std::vector<double> ExperimentReport::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[c]);
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void ExperimentReport::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    out << (i ? "," : "") << columns_[i];
  }
  out << '\n';
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
    out << '\n';
  }
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rows_) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < r.size(); ++i) {
      // JSON has no NaN; failed cells become null.
      obj[columns_[i]] = std::isfinite(r[i]) ? nlohmann::json(r[i]) : nlohmann::json(nullptr);
    }
    rows.push_back(std::move(obj));
  }
  return {
      {"experiment", id_},
      {"parameters", parameters_},
      {"environment",
       {{"precision", env_.precision}, {"workers", env_.workers}, {"seed", env_.seed}}},
      {"columns", columns_},
      {"rows", std::move(rows)},
      {"summary", summary_},
  };
}

void ExperimentReport::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
  if (path.extension() == ".json") {
    out << to_json().dump(2) << '\n';
  } else {
    write_csv(out);
  }
}

}  // namespace bandlimit::harness
