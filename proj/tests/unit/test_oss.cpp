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

#include <random>

#include "fixtures.hpp"
#include "safeset/error.hpp"
#include "safeset/metrics.hpp"
#include "safeset/oss.hpp"

using namespace safeset;
using namespace safeset::oss;
using fixtures::car;
using ingest::Dataset;

namespace {

OssSpec lead_spec() {
  OssSpec s;
  s.kind = OssKind::LeadFollowing;
  s.name = "custom";
  s.p_min = 0.0;
  s.p_max = 50.0;
  s.v_min = 0.0;
  s.v_max = 35.0;
  return s;
}

// SV at x = 0 heading +x at v0, leader at bumper gap `gap`.
Dataset two_cars(double v0, double v1, double gap, int frames = 1, int lead_lane = 1) {
  Dataset d;
  d.dt = 0.04;
  for (int f = 0; f < frames; ++f) {
    d.samples.push_back(car("t", f, 0.04, "sv", 0.0, 0.0, v0, 0.0, true, 1));
    d.samples.push_back(car("t", f, 0.04, "lead", gap + 4.5, 0.0, v1, 0.0, false, lead_lane));
  }
  return d;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Spec, PresetsAndVolume) {
  for (const auto& name : preset_names()) {
    const OssSpec s = preset(name);
    EXPECT_NO_THROW(s.validate()) << name;
    EXPECT_EQ(static_cast<int>(s.bounds().size()), s.dimension());
    EXPECT_EQ(s.dimension_names().size(), s.bounds().size());
    EXPECT_GT(s.volume(), 0.0);
  }
  EXPECT_EQ(preset("waymo-carla-17d").dimension(), 17);
  EXPECT_EQ(preset("highd-multi").dimension(), 13);
  EXPECT_DOUBLE_EQ(preset("ncap-lead").volume(), 25.0 * 25.0 * 40.0);
  EXPECT_EQ(code_of([] { preset("nope"); }), ErrorCode::InvalidSpec);
  OssSpec bad = lead_spec();
  bad.p_max = -1.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidSpec);
}

TEST(LeadFollowing, TwoCarState) {
  const auto ts = extract_lead_following(two_cars(20.0, 25.0, 30.0), lead_spec());
  ASSERT_EQ(ts.size(), 1u);
  ASSERT_EQ(ts[0].states.size(), 1u);
  const auto& v = ts[0].states[0].values;
  EXPECT_DOUBLE_EQ(v[0], 20.0);
  EXPECT_DOUBLE_EQ(v[1], 25.0);
  EXPECT_DOUBLE_EQ(v[2], 30.0);
}

TEST(LeadFollowing, NoLeaderOrOutOfBounds) {
  EXPECT_TRUE(extract_lead_following(two_cars(20.0, 25.0, 30.0, 1, 2), lead_spec()).empty());  // other lane
  EXPECT_TRUE(extract_lead_following(two_cars(20.0, 25.0, 60.0), lead_spec()).empty());
  EXPECT_EQ(code_of([] { extract_lead_following(two_cars(20, 20, 20), preset("highd-multi")); }),
            ErrorCode::SpecKindMismatch);
}

TEST(LeadFollowing, LeaderBehindIsIgnored) {
  Dataset d;
  d.dt = 0.04;
  d.samples.push_back(car("t", 0, 0.04, "sv", 0.0, 0.0, 20.0, 0.0, true, 1));
  d.samples.push_back(car("t", 0, 0.04, "b", -20.0, 0.0, 20.0, 0.0, false, 1));
  EXPECT_TRUE(extract_lead_following(d, lead_spec()).empty());
}

TEST(LeadFollowing, TtcMatchesRawGeometry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(5.0, 30.0);
  std::uniform_real_distribution<double> gap(1.0, 45.0);
  for (int i = 0; i < 100; ++i) {
    const double v0 = v(rng), v1 = v(rng), g = gap(rng);
    Dataset d;
    d.dt = 0.04;
    d.samples.push_back(car("t", 0, 0.04, "sv", 3.0, 0.0, v0, 0.0, true, 1, 4.0));
    d.samples.push_back(car("t", 0, 0.04, "lead", 3.0 + g + 0.5 * (4.0 + 6.0), 0.0, v1, 0.0, false, 1, 6.0));
    const auto ts = extract_lead_following(d, lead_spec());
    ASSERT_EQ(ts.size(), 1u);
    const auto stats = metrics::ttc_stats(ts);
    if (v0 > v1) {
      ASSERT_TRUE(stats.ttc_mean.has_value());
      EXPECT_NEAR(*stats.ttc_mean, std::min(9.0, g / (v0 - v1)), 1e-9);
    } else {
      EXPECT_EQ(stats.ttc_valid, 0);
    }
  }
}

TEST(MultiVehicle, EmptyFrontCentreAndAlongside) {
  const OssSpec spec = preset("highd-multi");
  Dataset d;
  d.dt = 0.04;
  d.samples.push_back(car("t", 0, 0.04, "sv", 0.0, 0.0, 25.0, 0.0, true, 2));
  d.samples.push_back(car("t", 0, 0.04, "left", 1.0, 3.75, 24.0, 0.0, false, 3));
  const auto ts = extract_multi_vehicle(d, spec);
  ASSERT_EQ(ts.size(), 1u);
  const auto& v = ts[0].states[0].values;
  ASSERT_EQ(v.size(), 13u);
  EXPECT_DOUBLE_EQ(v[0], 25.0);
  EXPECT_DOUBLE_EQ(v[1], 0.0);   // p_fl: longitudinal overlap
  EXPECT_DOUBLE_EQ(v[2], 24.0);  // v_fl
  EXPECT_DOUBLE_EQ(v[3], spec.p_max);  // p_fc
  EXPECT_DOUBLE_EQ(v[4], 25.0);        // v_fc = v0
  EXPECT_DOUBLE_EQ(v[7], spec.p_min);  // rear fill
  EXPECT_DOUBLE_EQ(v[8], 25.0);
}

TEST(MultiVehicle, AllEmptyEmitsNothing) {
  Dataset d;
  d.dt = 0.04;
  d.samples.push_back(car("t", 0, 0.04, "sv", 0.0, 0.0, 25.0, 0.0, true, 2));
  d.samples.push_back(car("t", 0, 0.04, "far", 0.0, 20.0, 25.0, 0.0, false, 7));
  EXPECT_TRUE(extract_multi_vehicle(d, preset("highd-multi")).empty());
}

TEST(MultiVehicle, NearestPerSubregionAndRearSign) {
  Dataset d;
  d.dt = 0.04;
  d.samples.push_back(car("t", 0, 0.04, "sv", 0.0, 0.0, 25.0, 0.0, true, 2));
  d.samples.push_back(car("t", 0, 0.04, "fc_far", 40.0, 0.0, 26.0, 0.0, false, 2));
  d.samples.push_back(car("t", 0, 0.04, "fc_near", 20.0, 0.0, 27.0, 0.0, false, 2));
  d.samples.push_back(car("t", 0, 0.04, "rr", -14.5, -3.75, 23.0, 0.0, false, 1));
  const auto ts = extract_multi_vehicle(d, preset("highd-multi"));
  ASSERT_EQ(ts.size(), 1u);
  const auto& v = ts[0].states[0].values;
  EXPECT_DOUBLE_EQ(v[3], 15.5);
  EXPECT_DOUBLE_EQ(v[4], 27.0);
  EXPECT_DOUBLE_EQ(v[11], -10.0);  // p_rr
  EXPECT_DOUBLE_EQ(v[12], 23.0);
}

TEST(MultiVehicle, RigidMotionInvariance) {
  // lane ids omitted so the lateral bands decide the subregions
  const Dataset base = [] {
    Dataset d = fixtures::multi_vehicle_dataset(40, 1, false, 17);
    for (auto& s : d.samples) s.lane_id.reset();
    return d;
  }();
  const OssSpec spec = preset("highd-multi");
  const auto ref = extract_multi_vehicle(base, spec);
  ASSERT_FALSE(ref.empty());
  for (double theta : {0.3, -1.2, 2.9}) {
    Dataset moved = base;
    const double c = std::cos(theta), s = std::sin(theta);
    for (auto& r : moved.samples) {
      const double x = r.x, y = r.y, vx = r.vx, vy = r.vy;
      r.x = c * x - s * y + 1234.5;
      r.y = s * x + c * y - 77.0;
      r.vx = c * vx - s * vy;
      r.vy = s * vx + c * vy;
    }
    const auto got = extract_multi_vehicle(moved, spec);
    ASSERT_EQ(got.size(), ref.size());
    for (std::size_t t = 0; t < ref.size(); ++t) {
      ASSERT_EQ(got[t].states.size(), ref[t].states.size());
      for (std::size_t i = 0; i < ref[t].states.size(); ++i) {
        for (std::size_t k = 0; k < 13; ++k) {
          EXPECT_NEAR(got[t].states[i].values[k], ref[t].states[i].values[k], 1e-8);
        }
      }
    }
  }
}

TEST(Pedestrian, CornerOffsets) {
  const OssSpec spec = preset("waymo-carla-ped");
  Dataset d;
  d.dt = 0.1;
  d.samples.push_back(car("t", 0, 0.1, "sv", 0.0, 0.0, 10.0, 0.0, true));
  d.samples.push_back(fixtures::pedestrian("t", 0, 0.1, "p1", 2.25 + 10.0, 0.9 + 2.0));
  d.samples.push_back(fixtures::pedestrian("t", 0, 0.1, "behind", -3.0, 0.0));
  const auto ts = extract_vehicle_pedestrian(d, spec);
  ASSERT_EQ(ts.size(), 1u);
  const auto& v = ts[0].states[0].values;
  ASSERT_EQ(v.size(), 5u);
  EXPECT_DOUBLE_EQ(v[0], 10.0);
  EXPECT_NEAR(v[1], 10.0, 1e-12);
  EXPECT_NEAR(v[2], 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(v[3], spec.p_max);
  EXPECT_DOUBLE_EQ(v[4], spec.q_max);
}

TEST(Pedestrian, BehindOnlyEmitsNothingAndNearestPerCorner) {
  const OssSpec spec = preset("waymo-carla-ped");
  Dataset d;
  d.dt = 0.1;
  d.samples.push_back(car("t", 0, 0.1, "sv", 0.0, 0.0, 10.0, 0.0, true));
  d.samples.push_back(fixtures::pedestrian("t", 0, 0.1, "behind", 1.0, 3.0));  // behind the bumper line
  EXPECT_TRUE(extract_vehicle_pedestrian(d, spec).empty());

  d.samples.push_back(fixtures::pedestrian("t", 0, 0.1, "l_far", 2.25 + 20.0, 0.9 + 1.0));
  d.samples.push_back(fixtures::pedestrian("t", 0, 0.1, "l_near", 2.25 + 5.0, 0.9 + 3.0));
  d.samples.push_back(fixtures::pedestrian("t", 0, 0.1, "r", 2.25 + 8.0, -0.9 - 1.5));
  const auto ts = extract_vehicle_pedestrian(d, spec);
  ASSERT_EQ(ts.size(), 1u);
  const auto& v = ts[0].states[0].values;
  EXPECT_NEAR(v[1], 5.0, 1e-12);
  EXPECT_NEAR(v[2], 3.0, 1e-12);
  EXPECT_NEAR(v[3], 8.0, 1e-12);
  EXPECT_NEAR(v[4], 1.5, 1e-12);
}

TEST(Combine, SeventeenDimensions) {
  auto state = [](std::vector<double> v, std::int64_t f) {
    OssState s;
    s.values = std::move(v);
    s.frame = f;
    s.time = 0.1 * static_cast<double>(f);
    s.trajectory_id = "t";
    return s;
  };
  std::vector<double> mv(13, 10.0);
  mv[0] = 12.0;
  StateTrajectory veh{"t", {state(mv, 0), state(mv, 1)}, {true}};
  StateTrajectory ped{"t", {state({12.0, 1, 2, 3, 4}, 1)}, {}};
  const auto out = combine_domains({veh}, {ped});
  ASSERT_EQ(out.size(), 1u);
  ASSERT_EQ(out[0].states.size(), 1u);  // frame 0 only valid for vehicles
  EXPECT_EQ(out[0].states[0].values.size(), 17u);
  EXPECT_DOUBLE_EQ(out[0].states[0].values[13], 1.0);

  StateTrajectory ped_bad{"t", {state({13.0, 1, 2, 3, 4}, 1)}, {}};
  EXPECT_EQ(code_of([&] { combine_domains({veh}, {ped_bad}); }), ErrorCode::FrameMisalignment);
}

TEST(Transitions, CountsAndGaps) {
  Dataset d = two_cars(20.0, 22.0, 30.0, 5);
  auto ts = extract_lead_following(d, lead_spec());
  EXPECT_EQ(transitions(ts).size(), 4u);

  Dataset g;
  g.dt = 0.04;
  for (int f : {0, 1, 3, 4, 5}) {
    g.samples.push_back(car("t", f, 0.04, "sv", 0.0, 0.0, 20.0, 0.0, true, 1));
    g.samples.push_back(car("t", f, 0.04, "lead", 34.5, 0.0, 22.0, 0.0, false, 1));
  }
  ts = extract_lead_following(g, lead_spec());
  ASSERT_EQ(ts.size(), 2u);
  const auto td = transitions(ts);
  ASSERT_EQ(td.size(), 3u);
  EXPECT_EQ(td.pairs[0].from.frame, 0);
  EXPECT_EQ(td.pairs[1].from.frame, 3);
  EXPECT_EQ(td.pairs[2].from.frame, 4);
  EXPECT_EQ(transitions({}).size(), 0u);
}

TEST(Properties, BoundsAndTransitionCount) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> v(0.0, 40.0);
  std::uniform_real_distribution<double> gap(-5.0, 70.0);
  const OssSpec spec = lead_spec();
  Dataset d;
  d.dt = 0.04;
  for (int f = 0; f < 400; ++f) {
    d.samples.push_back(car("t", f, 0.04, "sv", 0.0, 0.0, v(rng), 0.0, true, 1));
    d.samples.push_back(car("t", f, 0.04, "lead", 4.5 + gap(rng), 0.0, v(rng), 0.0, false, 1));
  }
  const auto ts = extract_lead_following(d, spec);
  const auto box = spec.bounds();
  std::size_t expected_pairs = 0;
  for (const auto& t : ts) {
    for (const auto& s : t.states) {
      for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_GE(s.values[k], box[k].lo);
        EXPECT_LE(s.values[k], box[k].hi);
      }
    }
    expected_pairs += t.states.size() - 1;
  }
  EXPECT_EQ(transitions(ts).size(), expected_pairs);
}

TEST(Export, StatesCsvHeader) {
  const auto ts = extract_lead_following(two_cars(20.0, 25.0, 30.0), lead_spec());
  const std::string text = states_to_csv(ts, lead_spec());
  EXPECT_EQ(text.substr(0, text.find('\n')), "trajectory_id,frame,time,unsafe,v0,v1,p");
}
