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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bandlimit::harness {

struct RankSummary {
  std::vector<std::string> methods;
  std::vector<std::vector<double>> ranks;  // per dataset, per method
  std::vector<double> average_ranks;
  double statistic = 0.0;  // Friedman chi-squared
  double p_value = 1.0;
  double critical_distance = 0.0;
  double alpha = 0.05;
  // Maximal runs of methods (sorted by average rank) whose rank spread is
  // within the critical distance. Indices refer to `methods`.
  std::vector<std::vector<std::size_t>> groups;
};

// Rank 1 goes to the largest value; tied values share the mean of their ranks.
std::vector<double> rank_descending(std::span<const double> values);

// Critical value q_alpha of the Nemenyi test for k in [2, 10] and alpha in
// {0.05, 0.10}. Throws ParameterError outside the table.
double nemenyi_q(std::size_t k, double alpha);

// accuracy[i][j]: score of method j on dataset i (higher is better).
RankSummary friedman_nemenyi(const std::vector<std::vector<double>>& accuracy, double alpha = 0.05,
                             std::vector<std::string> methods = {});

}  // namespace bandlimit::harness
