/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/
#include "safeset/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "safeset/error.hpp"

namespace safeset::metrics {

namespace {

void require_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::InvalidBeta, "beta must lie in (0,1), got " + std::to_string(beta));
}

double log_factorial(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

std::int64_t count_trailing_safe(const std::vector<std::pair<bool, bool>>& replay) {
  std::int64_t n = 0;
  for (const auto& [a, b] : replay) n = a && b ? n + 1 : 0;
  return n;
}

std::int64_t count_trailing_safe(const oss::TransitionSet& replay,
                                 const std::function<bool(const std::vector<double>&)>& inside) {
  std::int64_t n = 0;
  for (const auto& t : replay.pairs) n = inside(t.from.values) && inside(t.to.values) ? n + 1 : 0;
  return n;
}

double epsilon_from_count(std::int64_t n, double beta) {
  require_beta(beta);
  if (n < 0) throw Error(ErrorCode::InvalidCounts, "negative run length");
  if (n == 0) return 1.0;
  return -std::expm1(std::log(beta) / static_cast<double>(n));
}

double algorithm3_epsilon_bar(std::int64_t s, std::int64_t td_total, double beta) {
  require_beta(beta);
  if (td_total < 1 || s < 0 || s > td_total) {
    throw Error(ErrorCode::InvalidCounts, "need 0 <= s <= |TD| and |TD| >= 1");
  }
  const double lt = log_factorial(td_total);
  double sum = 0.0;
  for (std::int64_t i = 1; i <= s; ++i) {
    const double p = std::exp(log_factorial(i) + log_factorial(td_total - i) - lt);
    sum += epsilon_from_count(i, beta) * p;
  }
  return sum;
}

std::vector<double> trailing_run_pmf(std::int64_t s, std::int64_t c) {
  if (s < 0 || c < 0 || s + c < 1) throw Error(ErrorCode::InvalidCounts, "need s, c >= 0 and s + c >= 1");
  std::vector<double> pmf(static_cast<std::size_t>(s + 1), 0.0);
  if (c == 0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const double base = log_factorial(s) + std::log(static_cast<double>(c)) - log_factorial(s + c);
  for (std::int64_t i = 0; i <= s; ++i) {
    pmf[static_cast<std::size_t>(i)] = std::exp(base - log_factorial(s - i) + log_factorial(s + c - i - 1));
  }
  return pmf;
}

double epsilon_bar_exact(std::int64_t s, std::int64_t c, double beta) {
  require_beta(beta);
  const auto pmf = trailing_run_pmf(s, c);
  double sum = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) sum += pmf[i] * epsilon_from_count(static_cast<std::int64_t>(i), beta);
  return sum;
}

double epsilon_bar_bruteforce(const std::vector<bool>& labels, double beta, int cap) {
  require_beta(beta);
  if (cap > 10 || static_cast<int>(labels.size()) > cap) {
    throw Error(ErrorCode::TooLarge, "brute force is limited to 10 transitions");
  }
  if (labels.empty()) throw Error(ErrorCode::InvalidCounts, "no transitions");
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> eps(labels.size() + 1);
  for (std::size_t n = 0; n < eps.size(); ++n) eps[n] = epsilon_from_count(static_cast<std::int64_t>(n), beta);
  double sum = 0.0;
  std::int64_t count = 0;
  do {
    std::int64_t n = 0;
    for (int i : order) n = labels[static_cast<std::size_t>(i)] ? n + 1 : 0;
    sum += eps[static_cast<std::size_t>(n)];
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  return sum / static_cast<double>(count);
}

CoverageResult coverage(std::int64_t ds_count, double shape_measure, double space_measure) {
  if (!(space_measure > 0.0)) throw Error(ErrorCode::EmptySpace, "state space has no volume");
  CoverageResult r;
  r.ds_cardinality = ds_count;
  r.shape_measure = shape_measure;
  r.space_measure = space_measure;
  r.occupancy = shape_measure / space_measure;
  if (shape_measure > 0.0) r.density = static_cast<double>(ds_count) / shape_measure;
  return r;
}

BaselineResult ttc_stats(const std::vector<oss::StateTrajectory>& ts) {
  BaselineResult r;
  double sum = 0.0, sum2 = 0.0;
  for (const auto& t : ts) {
    for (const auto& s : t.states) {
      ++r.ttc_total;
      if (s.values.size() < 3) continue;
      const double closing = s.values[0] - s.values[1];
      if (!(closing > 0.0)) continue;
      const double ttc = std::min(kTtcClip, s.values[2] / closing);
      if (!(ttc > 0.0)) continue;
      ++r.ttc_valid;
      sum += ttc;
      sum2 += ttc * ttc;
    }
  }
  if (r.ttc_total > 0) r.ttc_valid_rate = static_cast<double>(r.ttc_valid) / static_cast<double>(r.ttc_total);
  if (r.ttc_valid > 0) {
    const double n = static_cast<double>(r.ttc_valid);
    r.ttc_mean = sum / n;
    r.ttc_std = std::sqrt(std::max(0.0, sum2 / n - (sum / n) * (sum / n)));
  }
  return r;
}

double travelled_km(const std::vector<oss::StateTrajectory>& ts) {
  double m = 0.0;
  for (const auto& t : ts) {
    for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
      if (i < t.gap_free.size() && !t.gap_free[i]) continue;
      const auto& a = t.states[i];
      const auto& b = t.states[i + 1];
      m += 0.5 * (a.values[0] + b.values[0]) * (b.time - a.time);
    }
  }
  return m / 1000.0;
}

double fatality_rate_bound(double safe_distance_km, double beta, bool collisions_present) {
  require_beta(beta);
  if (collisions_present) throw Error(ErrorCode::CollisionsPresent, "collision-free distance is undefined");
  if (!(safe_distance_km > 0.0)) throw Error(ErrorCode::InvalidConfig, "distance must be positive");
  const double miles = safe_distance_km / kKmPerMile;
  return -std::expm1(std::log(beta) / miles);
}

}  // namespace safeset::metrics
