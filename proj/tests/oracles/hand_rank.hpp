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

// Spreadsheet-style Friedman ranking: each cell's rank is counted directly
// (1 + number of larger scores + half the number of other equal scores),
// with no sorting involved.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline std::vector<std::vector<double>> hand_ranks(const std::vector<std::vector<double>>& m) {
  std::vector<std::vector<double>> ranks;
  for (const auto& row : m) {
    std::vector<double> r(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      double larger = 0.0, equal = 0.0;
      for (std::size_t t = 0; t < row.size(); ++t) {
        if (t == j) continue;
        if (row[t] > row[j]) larger += 1.0;
        if (row[t] == row[j]) equal += 1.0;
      }
      r[j] = 1.0 + larger + 0.5 * equal;
    }
    ranks.push_back(r);
  }
  return ranks;
}

inline std::vector<double> hand_average_ranks(const std::vector<std::vector<double>>& m) {
  const auto ranks = hand_ranks(m);
  std::vector<double> avg(m.front().size(), 0.0);
  for (const auto& r : ranks) {
    for (std::size_t j = 0; j < r.size(); ++j) avg[j] += r[j];
  }
  for (auto& a : avg) a /= static_cast<double>(m.size());
  return avg;
}

// chi^2_F = 12 n / (k (k + 1)) * (sum R_j^2 - k (k + 1)^2 / 4).
inline double hand_friedman(const std::vector<std::vector<double>>& m) {
  const auto avg = hand_average_ranks(m);
  const double n = static_cast<double>(m.size());
  const double k = static_cast<double>(avg.size());
  double sum_sq = 0.0;
  for (double r : avg) sum_sq += r * r;
  return 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
}

}  // namespace oracle
