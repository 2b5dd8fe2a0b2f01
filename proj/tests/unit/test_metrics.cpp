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
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "safeset/error.hpp"
#include "safeset/metrics.hpp"

using namespace safeset;
using namespace safeset::metrics;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

double eps(int n, double beta) { return 1.0 - std::exp(std::log(beta) / n); }

oss::StateTrajectory lead_states(const std::vector<std::vector<double>>& v) {
  oss::StateTrajectory t;
  t.trajectory_id = "t";
  for (std::size_t i = 0; i < v.size(); ++i) {
    oss::OssState s;
    s.values = v[i];
    s.frame = static_cast<std::int64_t>(i);
    s.time = static_cast<double>(i);
    t.states.push_back(s);
  }
  t.gap_free.assign(v.empty() ? 0 : v.size() - 1, true);
  return t;
}

}  // namespace

TEST(TrailingRun, Traces) {
  EXPECT_EQ(count_trailing_safe({{true, true}, {true, true}, {true, false}, {true, true}}), 1);
  EXPECT_EQ(count_trailing_safe({{true, true}, {true, true}, {true, true}}), 3);
  EXPECT_EQ(count_trailing_safe({{true, true}, {false, true}}), 0);
  EXPECT_EQ(count_trailing_safe({}), 0);
}

TEST(TrailingRun, WithMembership) {
  oss::TransitionSet td;
  for (double a : {1.0, 2.0, 7.0, 3.0, 4.0}) {
    oss::OssState s, t;
    s.values = {a};
    t.values = {a + 1.0};
    td.pairs.push_back({s, t});
  }
  const auto inside = [](const std::vector<double>& x) { return x[0] <= 6.0; };
  EXPECT_EQ(count_trailing_safe(td, inside), 2);
}

TEST(Epsilon, FromCount) {
  EXPECT_NEAR(epsilon_from_count(1, 0.001), 0.999, 1e-15);
  EXPECT_EQ(epsilon_from_count(0, 0.001), 1.0);
  const double e = epsilon_from_count(6906, 0.001);
  EXPECT_NEAR(e, 9.9975e-4, 5e-8);
  // inverting gives the count back
  EXPECT_NEAR(std::log(0.001) / std::log(1.0 - e), 6906.0, 1e-6);
  double prev = 1.0;
  for (std::int64_t n : {1, 2, 5, 10, 100, 1000, 100000, 10000000}) {
    const double x = epsilon_from_count(n, 0.001);
    EXPECT_LT(x, prev);
    EXPECT_GT(x, 0.0);
    prev = x;
  }
  EXPECT_LT(epsilon_from_count(100, 0.01), epsilon_from_count(100, 0.001));
  for (double b : {0.0, 1.0, 1.5, -0.1}) EXPECT_EQ(code_of([&] { epsilon_from_count(3, b); }), ErrorCode::InvalidBeta);
}

TEST(PositionalWeighting, HandTraces) {
  const double b = 0.001;
  EXPECT_DOUBLE_EQ(algorithm3_epsilon_bar(1, 2, b), 0.4995);
  EXPECT_NEAR(algorithm3_epsilon_bar(2, 3, b), (eps(1, b) + eps(2, b)) / 3.0, 1e-15);
  // s = td = 3: p1 = p2 = 1/3, p3 = 1
  EXPECT_NEAR(algorithm3_epsilon_bar(3, 3, b), (eps(1, b) + eps(2, b)) / 3.0 + eps(3, b), 1e-15);
  EXPECT_EQ(algorithm3_epsilon_bar(0, 5, b), 0.0);
  EXPECT_EQ(code_of([] { algorithm3_epsilon_bar(3, 2, 0.001); }), ErrorCode::InvalidCounts);
  EXPECT_EQ(code_of([] { algorithm3_epsilon_bar(0, 0, 0.001); }), ErrorCode::InvalidCounts);
}

TEST(PositionalWeighting, DivergesFromPermutationModel) {
  // s = 2, c = 2: i = 1 gets weight 1/C(4,1) = 1/4, but the trailing run is
  // 1 with probability 1/3
  const auto pmf = trailing_run_pmf(2, 2);
  EXPECT_NEAR(pmf[1], 1.0 / 3.0, 1e-15);
  const double b = 0.001;
  const double alg3 = algorithm3_epsilon_bar(2, 4, b);
  EXPECT_NEAR(alg3, eps(1, b) / 4.0 + eps(2, b) / 6.0, 1e-15);
  EXPECT_GT(std::fabs(alg3 - epsilon_bar_exact(2, 2, b)), 0.1);
}

TEST(Pmf, SmallCases) {
  auto p = trailing_run_pmf(1, 1);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
  p = trailing_run_pmf(2, 1);
  for (double x : p) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  p = trailing_run_pmf(3, 0);
  ASSERT_EQ(p.size(), 4u);
  EXPECT_EQ(p[3], 1.0);
  EXPECT_EQ(p[0] + p[1] + p[2], 0.0);
  EXPECT_EQ(code_of([] { trailing_run_pmf(0, 0); }), ErrorCode::InvalidCounts);
}

TEST(Pmf, SumsToOne) {
  for (int total = 1; total <= 200; ++total) {
    for (int s = 0; s <= total; s += (total > 40 ? 7 : 1)) {
      const auto p = trailing_run_pmf(s, total - s);
      double sum = 0.0;
      for (double x : p) sum += x;
      EXPECT_NEAR(sum, 1.0, 1e-12) << s << "," << total - s;
    }
  }
}

TEST(EpsilonBar, ExactHandValues) {
  const double b = 0.001;
  EXPECT_NEAR(epsilon_bar_exact(1, 1, b), 0.9995, 1e-15);
  EXPECT_NEAR(epsilon_bar_exact(2, 0, b), eps(2, b), 1e-15);
  EXPECT_NEAR(epsilon_bar_exact(2, 1, b), (1.0 + eps(1, b) + eps(2, b)) / 3.0, 1e-15);
  EXPECT_EQ(code_of([] { epsilon_bar_exact(1, 1, 2.0); }), ErrorCode::InvalidBeta);
}

TEST(EpsilonBar, BruteForceOracle) {
  EXPECT_NEAR(epsilon_bar_bruteforce({true, false}, 0.001), 0.9995, 1e-15);
  EXPECT_NEAR(epsilon_bar_bruteforce({true, true}, 0.001), eps(2, 0.001), 1e-15);
  EXPECT_NEAR(epsilon_bar_bruteforce({true, true, false}, 0.001), epsilon_bar_exact(2, 1, 0.001), 1e-12);
  EXPECT_EQ(code_of([] { epsilon_bar_bruteforce(std::vector<bool>(11, true), 0.001); }), ErrorCode::TooLarge);
  for (double b : {0.5, 0.1, 0.001}) {
    for (int total = 1; total <= 8; ++total) {
      for (int s = 0; s <= total; ++s) {
        std::vector<bool> labels(static_cast<std::size_t>(total), false);
        std::fill(labels.begin(), labels.begin() + s, true);
        EXPECT_NEAR(epsilon_bar_exact(s, total - s, b), epsilon_bar_bruteforce(labels, b), 1e-12);
      }
    }
  }
}

TEST(EpsilonBar, OnlyCountsMatter) {
  std::vector<bool> labels{true, false, true, true, false, true};
  const double ref = epsilon_bar_bruteforce(labels, 0.1);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(labels.begin(), labels.end(), rng);
    EXPECT_NEAR(epsilon_bar_bruteforce(labels, 0.1), ref, 1e-12);
  }
  EXPECT_NEAR(epsilon_bar_exact(4, 2, 0.1), ref, 1e-12);
}

TEST(Coverage, Arithmetic) {
  auto c = coverage(100, 10.0, 100.0);
  ASSERT_TRUE(c.density.has_value());
  EXPECT_DOUBLE_EQ(*c.density, 10.0);
  EXPECT_DOUBLE_EQ(c.occupancy, 0.1);
  c = coverage(5, 0.0, 100.0);
  EXPECT_FALSE(c.density.has_value());
  EXPECT_EQ(c.occupancy, 0.0);
  EXPECT_EQ(code_of([] { coverage(1, 1.0, 0.0); }), ErrorCode::EmptySpace);
}

TEST(Ttc, ValidityAndClip) {
  auto r = ttc_stats({lead_states({{20, 10, 50}})});
  ASSERT_TRUE(r.ttc_mean.has_value());
  EXPECT_DOUBLE_EQ(*r.ttc_mean, 5.0);
  r = ttc_stats({lead_states({{10, 20, 50}})});
  EXPECT_EQ(r.ttc_valid, 0);
  EXPECT_FALSE(r.ttc_mean.has_value());
  r = ttc_stats({lead_states({{20, 19.9, 50}})});
  EXPECT_DOUBLE_EQ(*r.ttc_mean, 9.0);
}

TEST(Ttc, InvalidStatesDoNotShiftMoments) {
  const auto valid = lead_states({{20, 10, 50}, {30, 10, 40}, {25, 24, 3}});
  const auto mixed = lead_states({{20, 10, 50}, {5, 10, 50}, {30, 10, 40}, {25, 25, 9}, {25, 24, 3}});
  const auto a = ttc_stats({valid});
  const auto b = ttc_stats({mixed});
  EXPECT_DOUBLE_EQ(*a.ttc_mean, *b.ttc_mean);
  EXPECT_DOUBLE_EQ(*a.ttc_std, *b.ttc_std);
  EXPECT_DOUBLE_EQ(b.ttc_valid_rate, 3.0 / 5.0);
  // mean of {5, 2, 3}
  EXPECT_NEAR(*a.ttc_mean, 10.0 / 3.0, 1e-12);
}

TEST(Fatality, TableValues) {
  const double km[] = {3276.48, 551.81, 5725.99, 40.778, 399.195};
  const double table[] = {0.0034, 0.0199, 0.0019, 0.2386, 0.0275};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(fatality_rate_bound(km[i], 0.001), table[i], 5e-4) << km[i];
  EXPECT_NEAR(fatality_rate_bound(1.609344, 0.001), 0.999, 1e-12);
  EXPECT_EQ(code_of([] { fatality_rate_bound(10.0, 0.001, true); }), ErrorCode::CollisionsPresent);
}

TEST(Distance, TrapezoidOverGapFreeSteps) {
  auto t = lead_states({{10, 0, 0}, {20, 0, 0}, {20, 0, 0}});
  EXPECT_NEAR(travelled_km({t}), 0.035, 1e-15);
  t.gap_free[1] = false;
  EXPECT_NEAR(travelled_km({t}), 0.015, 1e-15);
}
