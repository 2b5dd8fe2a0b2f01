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
#include <sstream>
#include <filesystem>

#include "fixtures.hpp"
#include "json.hpp"
#include "safeset/error.hpp"
#include "safeset/metrics.hpp"
#include "safeset/pipeline.hpp"
#include "safeset/simgen.hpp"

using namespace safeset;
using namespace safeset::pipeline;
using json = nlohmann::json;

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

AnalysisConfig ncap_config() {
  AnalysisConfig c;
  c.oss = oss::preset("ncap-lead");
  c.mc_samples = 20000;
  c.slice_cells = 40;
  return c;
}

// Eight follow runs behind faster leads, all inside the highd-lead box.
ingest::Dataset collision_free() {
  ingest::Dataset all;
  for (int i = 0; i < 8; ++i) {
    sim::ScenarioSpec sc;
    sc.kind = sim::ScenarioKind::SlowerLead;
    sc.sv_speed0 = 22.0 + i;
    sc.lead_speed0 = 24.0 + 1.3 * i;
    sc.initial_gap = 15.0 + 2.5 * i;
    sc.duration = 2.0;
    auto d = sim::simulate_follow(sim::idm0(), sc, "cf" + std::to_string(i));
    all.dt = d.dt;
    all.samples.insert(all.samples.end(), d.samples.begin(), d.samples.end());
  }
  return all;
}

const AnalysisReport& ncap_report() {
  static const AnalysisReport r = run_analysis(sim::ncap_battery(sim::idm0(), 1), ncap_config());
  return r;
}

}  // namespace

TEST(Config, ParseResolveAndEcho) {
  const auto dir = fixtures::temp_dir("config");
  fixtures::write_file(dir / "c.json", R"({
    "inputs": ["data.csv"], "labels": ["/abs/l.csv"], "oss": {"preset": "highd-multi"},
    "beta": 0.01, "alpha": {"lo": 0.05, "hi": 50, "threshold": 0.2},
    "reach_mode": "ancestors", "match_radius": 0.5, "seed": 9, "out": "o", "columns": {"x": "X"}})");
  const auto c = load_config((dir / "c.json").string());
  EXPECT_EQ(c.inputs, std::vector<std::string>{(dir / "data.csv").string()});
  EXPECT_EQ(c.labels, std::vector<std::string>{"/abs/l.csv"});
  EXPECT_EQ(c.oss.kind, oss::OssKind::MultiVehicle);
  EXPECT_EQ(c.beta, 0.01);
  EXPECT_EQ(c.alpha_hi, 50.0);
  EXPECT_EQ(c.reach_mode, safe::ReachMode::Ancestors);
  EXPECT_EQ(c.effective_cluster_max(), 1000u);
  EXPECT_EQ(c.schema.header_for("x"), "X");
  const auto again = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
  EXPECT_EQ(parse_config("{}").effective_cluster_max(), 100000u);
}

TEST(Config, Rejections) {
  EXPECT_EQ(code_of([] { parse_config(R"({"beta": 1.5})"); }), ErrorCode::InvalidBeta);
  EXPECT_EQ(code_of([] { parse_config(R"({"betta": 0.1})"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config(R"({"alpha": {"lo": 2, "hi": 1}})"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config(R"({"mc_samples": 10})"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config("[1,2"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config(R"({"oss": "nope"})"); }), ErrorCode::InvalidSpec);
  AnalysisConfig c = ncap_config();
  c.inputs = {"/nonexistent/file.csv"};
  EXPECT_EQ(code_of([&] { run_analysis(c); }), ErrorCode::IoError);
}

TEST(Normalize, RoundTrip) {
  const auto spec = oss::preset("highd-lead");
  const std::vector<double> x{27.5, 20.0, 12.5};
  const auto u = normalize(spec, x);
  EXPECT_NEAR(u[0], 0.5, 1e-15);
  EXPECT_NEAR(u[1], 0.0, 1e-15);
  EXPECT_NEAR(u[2], 0.25, 1e-15);
  const auto back = denormalize(spec, u);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(back[k], x[k], 1e-12);
}

TEST(Analysis, NcapBattery) {
  const auto& r = ncap_report();
  EXPECT_GE(r.dataset.collision_events, 1);
  EXPECT_GE(r.epsilon.c_count, 1);
  EXPECT_LT(r.ds.size(), static_cast<std::size_t>(r.dataset.states));
  EXPECT_FALSE(r.ds.empty());
  EXPECT_EQ(r.ds.size() + r.excluded.size(), static_cast<std::size_t>(r.dataset.states));
  EXPECT_EQ(r.epsilon.s_count + r.epsilon.c_count, r.dataset.transitions);
  EXPECT_TRUE(r.exclusion.passed);
  EXPECT_EQ(r.ds_contained, static_cast<std::int64_t>(r.ds.size()));
  EXPECT_GT(r.coverage.occupancy, 0.0);
  EXPECT_LE(r.coverage.occupancy, 1.0);
  EXPECT_GT(r.epsilon.epsilon_bar_exact, 0.0);
  EXPECT_LT(r.epsilon.epsilon_bar_exact, 1.0);
  EXPECT_NEAR(r.epsilon.epsilon_bar_exact,
              metrics::epsilon_bar_exact(r.epsilon.s_count, r.epsilon.c_count, r.config.beta), 1e-15);
  EXPECT_FALSE(r.baseline.safe_distance_km.has_value());
  EXPECT_FALSE(r.baseline.fatality_bound.has_value());
  bool mdp = false, iid = false;
  for (const auto& w : r.warnings) {
    mdp |= w.find("Markov") != std::string::npos;
    iid |= w.find("i.i.d.") != std::string::npos;
  }
  EXPECT_TRUE(mdp);
  EXPECT_TRUE(iid);
}

TEST(Analysis, CollisionFreeBranch) {
  const auto data = collision_free();
  AnalysisConfig c;
  c.oss = oss::preset("highd-lead");
  c.mc_samples = 20000;
  const auto r = run_analysis(data, c);
  EXPECT_EQ(r.dataset.collision_events, 0);
  EXPECT_EQ(r.epsilon.c_count, 0);
  ASSERT_TRUE(r.baseline.safe_distance_km.has_value());
  ASSERT_TRUE(r.baseline.fatality_bound.has_value());
  EXPECT_NEAR(*r.baseline.fatality_bound, metrics::fatality_rate_bound(*r.baseline.safe_distance_km, c.beta), 1e-15);
  EXPECT_NEAR(r.epsilon.epsilon_bar_exact, metrics::epsilon_from_count(r.epsilon.s_count, c.beta), 1e-15);
  EXPECT_EQ(r.epsilon.n_trailing, r.epsilon.s_count);
  EXPECT_EQ(r.ds.size(), static_cast<std::size_t>(r.dataset.states));
  // about 8 runs x 2 s at 22..30 m/s
  EXPECT_NEAR(*r.baseline.safe_distance_km, 0.4, 0.1);
}

TEST(Analysis, EmptySafeSet) {
  // every trajectory ends in a collision
  ingest::Dataset d;
  for (int i = 0; i < 3; ++i) {
    sim::ScenarioSpec sc;
    sc.kind = sim::ScenarioKind::StationaryLead;
    sc.sv_speed0 = 20.0 + i;
    sc.initial_gap = 10.0;
    auto one = sim::simulate_follow(sim::idm1(), sc, "c" + std::to_string(i));
    ASSERT_EQ(one.collision_events.size(), 1u);
    d.dt = one.dt;
    d.samples.insert(d.samples.end(), one.samples.begin(), one.samples.end());
    d.collision_events.push_back(one.collision_events[0]);
  }
  d.source_labels = d.collision_events;
  const auto r = run_analysis(d, ncap_config());
  EXPECT_TRUE(r.ds.empty());
  EXPECT_TRUE(r.empty_shape);
  EXPECT_TRUE(slices(r).empty());
  const json j = json::parse(report_json(r));
  EXPECT_TRUE(j["shape"]["empty"].get<bool>());
  EXPECT_TRUE(j["coverage"]["density"].is_null());
}

TEST(Report, DeterministicBytes) {
  const auto a = run_analysis(sim::ncap_battery(sim::idm0(), 1), ncap_config());
  EXPECT_EQ(report_json(a), report_json(ncap_report()));
  EXPECT_EQ(shape_json(a), shape_json(ncap_report()));
  EXPECT_EQ(ds_csv(a), ds_csv(ncap_report()));
}

TEST(Report, FilesAndSummary) {
  const auto dir = fixtures::temp_dir("emit");
  const auto files = emit_report(ncap_report(), (dir / "out").string());
  ASSERT_GE(files.size(), 3u + 5u);
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
  const std::string report = fixtures::read_file(dir / "out" / "report.json");
  const json j = json::parse(report);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["epsilon"]["c"].get<std::int64_t>(), ncap_report().epsilon.c_count);
  EXPECT_FALSE(summarize_report_json(report).empty());
  const std::string ds = fixtures::read_file(dir / "out" / "ds.csv");
  EXPECT_EQ(static_cast<std::size_t>(std::count(ds.begin(), ds.end(), '\n')), ncap_report().ds.size() + 1);
}

TEST(Slices, LeadFollowingBandsAreConsistent) {
  const auto& r = ncap_report();
  const auto s = slices(r);
  ASSERT_EQ(s.size(), 5u);  // five v0 bands over (v1, p)
  for (const auto& sl : s) {
    EXPECT_EQ(sl.file_name.rfind("slice_v1-p_v0_", 0), 0u) << sl.file_name;
    std::istringstream in(sl.csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "v1,p,member,ds_count");
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      const auto last = line.rfind(',');
      const auto prev = line.rfind(',', last - 1);
      const int count = std::stoi(line.substr(last + 1));
      const int member = std::stoi(line.substr(prev + 1, last - prev - 1));
      if (count > 0) EXPECT_EQ(member, 1) << line;
    }
    EXPECT_EQ(rows, 40 * 40);
  }
}

TEST(Slices, MultiVehicleHasSixSubregionSlices) {
  AnalysisConfig c;
  c.oss = oss::preset("highd-multi");
  c.mc_samples = 5000;
  c.slice_cells = 10;
  const auto r = run_analysis(fixtures::multi_vehicle_dataset(150, 1, true), c);
  ASSERT_FALSE(r.ds.empty());
  const auto s = slices(r);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(r.ds_contained, static_cast<std::int64_t>(r.ds.size()));
  EXPECT_TRUE(r.exclusion.passed);
}
