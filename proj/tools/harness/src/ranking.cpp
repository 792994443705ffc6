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

#include "bandlimit/harness/ranking.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "bandlimit/errors.hpp"

namespace bandlimit::harness {
namespace {

// Studentized range quantiles at infinite degrees of freedom divided by
// sqrt(2), k = 2..10.
constexpr std::array<double, 9> kQ05 = {1.959964, 2.343701, 2.569032, 2.727774, 2.849705,
                                        2.948320, 3.030878, 3.101730, 3.163684};
constexpr std::array<double, 9> kQ10 = {1.644854, 2.052293, 2.291341, 2.459516, 2.588521,
                                        2.692732, 2.779884, 2.854606, 2.919889};

}  // namespace

std::vector<double> rank_descending(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

double nemenyi_q(std::size_t k, double alpha) {
  if (k < 2 || k > 10) throw ParameterError("Nemenyi table covers 2 to 10 methods");
  if (std::abs(alpha - 0.05) < 1e-12) return kQ05[k - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return kQ10[k - 2];
  throw ParameterError("Nemenyi table covers alpha 0.05 and 0.10");
}

RankSummary friedman_nemenyi(const std::vector<std::vector<double>>& accuracy, double alpha,
                             std::vector<std::string> methods) {
  const std::size_t n = accuracy.size();
  const std::size_t k = n ? accuracy.front().size() : 0;
  if (n < 2 || k < 2) throw ParameterError("Friedman test needs at least 2 datasets and 2 methods");
  for (const auto& row : accuracy) {
    if (row.size() != k) throw ParameterError("ragged accuracy matrix");
  }
  if (methods.empty()) {
    for (std::size_t j = 0; j < k; ++j) methods.push_back("m" + std::to_string(j));
  }
  if (methods.size() != k) throw ParameterError("method name count differs from matrix width");

  RankSummary out;
  out.methods = std::move(methods);
  out.alpha = alpha;
  out.average_ranks.assign(k, 0.0);
  for (const auto& row : accuracy) {
    out.ranks.push_back(rank_descending(row));
    for (std::size_t j = 0; j < k; ++j) out.average_ranks[j] += out.ranks.back()[j];
  }
  for (auto& r : out.average_ranks) r /= static_cast<double>(n);

  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  double sum_sq = 0.0;
  for (double r : out.average_ranks) sum_sq += r * r;
  out.statistic = 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  // Rounding can leave a tiny negative value when all ranks are equal.
  if (std::abs(out.statistic) < 1e-12) out.statistic = 0.0;
  const boost::math::chi_squared dist(kd - 1.0);
  out.p_value = boost::math::cdf(boost::math::complement(dist, std::max(out.statistic, 0.0)));
  out.critical_distance = nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * nd));

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.average_ranks[a] < out.average_ranks[b];
  });
  // Longest window starting at each position; keep those not nested in the
  // window of an earlier start.
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i;
    while (j + 1 < k &&
           out.average_ranks[order[j + 1]] - out.average_ranks[order[i]] <=
               out.critical_distance + 1e-12) {
      ++j;
    }
    if (i == 0 || j + 1 > last_end) {
      std::vector<std::size_t> group(order.begin() + static_cast<std::ptrdiff_t>(i),
                                     order.begin() + static_cast<std::ptrdiff_t>(j + 1));
      std::sort(group.begin(), group.end());
      out.groups.push_back(std::move(group));
      last_end = j + 1;
    }
  }
  return out;
}

}  // namespace bandlimit::harness
