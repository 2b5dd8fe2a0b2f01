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

#include <cmath>
#include <map>
#include <set>

#include "safeset/error.hpp"
#include "safeset/ingest.hpp"
#include "safeset/simgen.hpp"

using namespace safeset;
using namespace safeset::sim;

namespace {

struct Track {
  std::vector<double> xs, vs, xl, vl;
};

Track split(const ingest::Dataset& d) {
  Track t;
  for (const auto& s : d.samples) {
    if (s.sv_flag) {
      t.xs.push_back(s.x);
      t.vs.push_back(s.vx);
    } else {
      t.xl.push_back(s.x);
      t.vl.push_back(s.vx);
    }
  }
  return t;
}

double terminal_gap(const ingest::Dataset& d) {
  const Track t = split(d);
  return t.xl.back() - t.xs.back() - kVehicleLength;
}

}  // namespace

TEST(Idm, Presets) {
  const IdmParams a = idm0();
  EXPECT_EQ(a, (IdmParams{0.5, 0.1, 9.0, 25.0, 0.73, 1.67, 4.0}));
  EXPECT_EQ(idm1(), (IdmParams{4.0, 4.0, 2.0, 25.0, 0.73, 1.67, 4.0}));
  EXPECT_EQ(policy_preset("idm1"), idm1());
  const IdmParams c = policy_from_json(R"({"b_max": 5.5, "T": 1.0})");
  EXPECT_EQ(c.b_max, 5.5);
  EXPECT_EQ(c.T, 1.0);
  EXPECT_EQ(c.s0, idm1().s0);
  EXPECT_THROW(policy_from_json(R"({"b_max": -1})"), Error);
}

TEST(Idm, Equilibria) {
  const IdmParams p = idm1();
  EXPECT_LT(std::fabs(idm_accel(p, p.v_free, 1e6, 0.0)), 1e-3);
  EXPECT_NEAR(idm_accel(p, 0.0, p.s0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(idm_accel(p, 0.0, 1e12, 0.0), p.a_max, 1e-12);
  EXPECT_EQ(idm_accel(p, 20.0, 0.1, 10.0), -p.b_max);
  try {
    idm_accel(p, 1.0, 0.0, 0.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveGap);
  }
}

TEST(Idm, MonotoneInGap) {
  for (const IdmParams& p : {idm0(), idm1()}) {
    for (double v : {0.0, 5.0, 15.0, 30.0}) {
      for (double dv : {-5.0, 0.0, 5.0}) {
        double prev = idm_accel(p, v, 200.0, dv);
        for (double gap = 199.0; gap > 0.05; gap *= 0.9) {
          const double a = idm_accel(p, v, gap, dv);
          EXPECT_LE(a, prev + 1e-15) << v << " " << dv << " " << gap;
          prev = a;
        }
      }
    }
  }
}

TEST(Follow, StationaryLeadIdm0StopsSafely) {
  ScenarioSpec sc;
  sc.kind = ScenarioKind::StationaryLead;
  sc.sv_speed0 = 10.0;
  sc.initial_gap = 100.0;
  sc.duration = 40.0;
  const auto d = simulate_follow(idm0(), sc);
  EXPECT_TRUE(d.collision_events.empty());
  EXPECT_EQ(d.samples[d.samples.size() - 2].vx, 0.0);
  // The IDM's late braking with T = 0.1 s undershoots s0 even in the
  // continuous limit; compare with a fine-step reference instead.
  ScenarioSpec fine = sc;
  fine.dt = 0.0005;
  const double ref = terminal_gap(simulate_follow(idm0(), fine));
  EXPECT_GT(ref, 0.25);
  EXPECT_NEAR(terminal_gap(d), ref, 0.05 * ref);
  EXPECT_TRUE(ingest::parse_trajectory_csv_text(ingest::dataset_to_csv(d)).warnings.empty());
}

TEST(Follow, BrakingLeadBeatsIdm1) {
  ScenarioSpec sc;
  sc.kind = ScenarioKind::BrakingLead;
  sc.sv_speed0 = 20.0;
  sc.lead_speed0 = 20.0;
  sc.lead_decel = 6.0;
  sc.initial_gap = 20.0;
  const auto d = simulate_follow(idm1(), sc);
  ASSERT_EQ(d.collision_events.size(), 1u);
  EXPECT_LE(terminal_gap(d), 0.0);
  // last emitted frame is the collision frame
  EXPECT_EQ(d.samples.back().frame, d.collision_events[0].frame);
}

TEST(Follow, FasterLeadDiverges) {
  ScenarioSpec sc;
  sc.kind = ScenarioKind::SlowerLead;
  sc.sv_speed0 = 10.0;
  sc.lead_speed0 = 30.0;
  sc.initial_gap = 10.0;
  const auto d = simulate_follow(idm1(), sc);
  EXPECT_TRUE(d.collision_events.empty());
  const Track t = split(d);
  for (std::size_t i = 1; i < t.xs.size(); ++i) {
    EXPECT_GT(t.xl[i] - t.xs[i], t.xl[i - 1] - t.xs[i - 1]);
  }
}

TEST(Follow, SpeedsNonNegativePositionsMonotone) {
  for (const auto& d : {ncap_battery(idm0(), 7), ncap_battery(idm1(), 7)}) {
    std::map<std::string, double> last;
    for (const auto& s : d.samples) {
      EXPECT_GE(s.vx, 0.0);
      auto it = last.find(s.agent_id);
      if (it != last.end()) EXPECT_GE(s.x, it->second);
      last[s.agent_id] = s.x;
    }
  }
}

TEST(Follow, NoThrustNoMotion) {
  IdmParams p = idm1();
  p.a_max = 0.0;
  ScenarioSpec sc;
  sc.sv_speed0 = 0.0;
  sc.initial_gap = 30.0;
  const Track t = split(simulate_follow(p, sc));
  for (double x : t.xs) EXPECT_EQ(x, 0.0);
}

// Halving dt on cells that end in steady following changes the terminal gap
// by under 1%. Cells that brake to rest end a few decimetres behind the lead;
// there the first-order error is a few percent of that small gap, so we check
// first-order convergence and a 1% bound relative to the initial gap instead.
TEST(Follow, HalvingDtIsStable) {
  int steady = 0, stopping = 0;
  for (const auto& base : ncap_scenarios(1)) {
    auto with_dt = [&](double dt) {
      ScenarioSpec s = base;
      s.dt = dt;
      return simulate_follow(idm0(), s);
    };
    const auto g1 = with_dt(0.04), g2 = with_dt(0.02), g4 = with_dt(0.01);
    if (!g1.collision_events.empty() || !g2.collision_events.empty() || !g4.collision_events.empty()) continue;
    const double a = terminal_gap(g1), b = terminal_gap(g2), c = terminal_gap(g4);
    EXPECT_LT(std::fabs(a - b), 0.01 * base.initial_gap) << to_string(base.kind) << " v0 " << base.sv_speed0;
    if (base.kind == ScenarioKind::SlowerLead) {
      EXPECT_LT(std::fabs(a - b), 0.01 * std::fabs(b)) << "v0 " << base.sv_speed0;
      ++steady;
    } else {
      const double ratio = (a - b) / (b - c);
      EXPECT_GT(ratio, 1.5) << to_string(base.kind) << " v0 " << base.sv_speed0;
      EXPECT_LT(ratio, 2.8) << to_string(base.kind) << " v0 " << base.sv_speed0;
      ++stopping;
    }
  }
  EXPECT_GE(steady, 10);
  EXPECT_GE(stopping, 10);
}

TEST(Battery, SizeCollisionsAndDeterminism) {
  const auto specs = ncap_scenarios(3);
  ASSERT_EQ(specs.size(), 48u);
  int kinds[3] = {0, 0, 0};
  for (const auto& s : specs) ++kinds[static_cast<int>(s.kind)];
  EXPECT_EQ(kinds[0], 16);
  EXPECT_EQ(kinds[1], 16);
  EXPECT_EQ(kinds[2], 16);

  const auto a = ncap_battery(idm0(), 3);
  std::set<std::string> ids;
  for (const auto& s : a.samples) ids.insert(s.trajectory_id);
  EXPECT_EQ(ids.size(), 48u);
  EXPECT_GE(a.collision_events.size(), 1u);
  EXPECT_GE(ncap_battery(idm1(), 3).collision_events.size(), 1u);
  EXPECT_EQ(ingest::dataset_to_csv(a), ingest::dataset_to_csv(ncap_battery(idm0(), 3)));
  EXPECT_NE(ingest::dataset_to_csv(a), ingest::dataset_to_csv(ncap_battery(idm0(), 4)));
}

TEST(Scenario, Validation) {
  ScenarioSpec sc;
  sc.dt = 0.2;
  EXPECT_THROW(sc.validate(), Error);
  sc.dt = 0.04;
  sc.initial_gap = 0.0;
  EXPECT_THROW(sc.validate(), Error);
}
