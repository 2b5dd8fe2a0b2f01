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
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "safeset/oss.hpp"

namespace safeset::metrics {

struct EpsilonResult {
  double beta = 0.001;
  std::int64_t n_trailing = 0;
  std::int64_t s_count = 0;
  std::int64_t c_count = 0;
  double epsilon_bar_paper = 1.0;  // positional weighting i!(|TD|-i)!/|TD|!
  double epsilon_bar_exact = 1.0;  // expectation over uniform replays
  std::optional<double> epsilon_single;
  double confidence() const { return 1.0 - beta; }
};

struct CoverageResult {
  std::optional<double> density;
  double occupancy = 0.0;
  std::int64_t ds_cardinality = 0;
  double shape_measure = 0.0;
  double space_measure = 0.0;
};

struct BaselineResult {
  std::optional<double> ttc_mean;
  std::optional<double> ttc_std;
  double ttc_valid_rate = 0.0;
  std::int64_t ttc_valid = 0;
  std::int64_t ttc_total = 0;
  std::optional<double> safe_distance_km;
  std::optional<double> fatality_bound;
};

/// Trailing run of transitions with both endpoints inside.
std::int64_t count_trailing_safe(const std::vector<std::pair<bool, bool>>& replay);
std::int64_t count_trailing_safe(const oss::TransitionSet& replay,
                                 const std::function<bool(const std::vector<double>&)>& inside);

/// 1 - exp(ln beta / n); 1 for n = 0. Throws InvalidBeta.
double epsilon_from_count(std::int64_t n, double beta);

/// sum_{i=1..s} eps_i * i! (td - i)! / td!. Throws InvalidCounts.
double algorithm3_epsilon_bar(std::int64_t s, std::int64_t td_total, double beta);

/// P(N = i), i = 0..s, for a uniformly random order of s safe and c unsafe
/// transitions. Throws InvalidCounts.
std::vector<double> trailing_run_pmf(std::int64_t s, std::int64_t c);

double epsilon_bar_exact(std::int64_t s, std::int64_t c, double beta);

/// Average of epsilon_from_count over all |labels|! orderings (true = safe).
/// Throws TooLarge when |labels| > cap or cap > 10.
double epsilon_bar_bruteforce(const std::vector<bool>& labels, double beta, int cap = 10);

/// Throws EmptySpace when space_measure <= 0.
CoverageResult coverage(std::int64_t ds_count, double shape_measure, double space_measure);

constexpr double kTtcClip = 9.0;

/// Over lead-following states (v0, v1, p).
BaselineResult ttc_stats(const std::vector<oss::StateTrajectory>& ts);

/// Subject-vehicle distance over gap-free steps (trapezoidal in v0), km.
double travelled_km(const std::vector<oss::StateTrajectory>& ts);

constexpr double kKmPerMile = 1.609344;

/// 1 - exp(ln beta / miles). Throws CollisionsPresent when
/// `collisions_present`, InvalidConfig for non-positive distance.
double fatality_rate_bound(double safe_distance_km, double beta, bool collisions_present = false);

}  // namespace safeset::metrics
