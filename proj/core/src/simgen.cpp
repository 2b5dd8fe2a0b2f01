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
#include "safeset/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include "json.hpp"
#include <random>

#include "safeset/error.hpp"
#include "safeset/geometry/mc_volume.hpp"

namespace safeset::sim {

void IdmParams::validate() const {
  for (double v : {s0, T, b_max, v_free, a_max, b_comf, delta}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "IDM parameters must be positive");
  }
}

IdmParams idm0() { return {0.5, 0.1, 9.0, 25.0, 0.73, 1.67, 4.0}; }
IdmParams idm1() { return {4.0, 4.0, 2.0, 25.0, 0.73, 1.67, 4.0}; }

IdmParams policy_preset(const std::string& name) {
  if (name == "idm0") return idm0();
  if (name == "idm1") return idm1();
  throw Error(ErrorCode::InvalidConfig, "unknown policy '" + name + "' (expected idm0, idm1 or a JSON file)");
}

IdmParams policy_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("policy JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "policy JSON must be an object");
  IdmParams p = idm1();
  auto read = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw Error(ErrorCode::InvalidConfig, std::string("policy key '") + key + "' must be a number");
    dst = j[key].get<double>();
  };
  read("s0", p.s0);
  read("T", p.T);
  read("b_max", p.b_max);
  read("v_free", p.v_free);
  read("a_max", p.a_max);
  read("b_comf", p.b_comf);
  read("delta", p.delta);
  p.validate();
  return p;
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::StationaryLead: return "stationary_lead";
    case ScenarioKind::SlowerLead: return "slower_lead";
    case ScenarioKind::BrakingLead: return "braking_lead";
  }
  return "unknown";
}

void ScenarioSpec::validate() const {
  if (!(initial_gap > 0.0)) throw Error(ErrorCode::NonPositiveGap, "initial gap must be positive");
  if (!(dt > 0.0 && dt <= 0.1)) throw Error(ErrorCode::InvalidConfig, "dt must lie in (0, 0.1]");
  if (!(duration > 0.0)) throw Error(ErrorCode::InvalidConfig, "duration must be positive");
  if (sv_speed0 < 0.0 || lead_speed0 < 0.0 || lead_decel < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "speeds and deceleration must be non-negative");
  }
}

double idm_accel(const IdmParams& p, double v, double gap, double dv) {
  if (!(gap > 0.0)) throw Error(ErrorCode::NonPositiveGap, "IDM needs a positive gap");
  const double ab = p.a_max * p.b_comf;
  const double interaction = ab > 0.0 ? v * dv / (2.0 * std::sqrt(ab)) : 0.0;
  const double s_star = std::max(p.s0, p.s0 + v * p.T + interaction);
  const double a = p.a_max * (1.0 - std::pow(v / p.v_free, p.delta) - (s_star / gap) * (s_star / gap));
  return std::clamp(a, -p.b_max, p.a_max);
}

ingest::Dataset simulate_follow(const IdmParams& sv, const ScenarioSpec& sc, const std::string& trajectory_id) {
  sc.validate();
  ingest::Dataset d;
  d.dt = sc.dt;
  const auto steps = static_cast<std::int64_t>(std::llround(sc.duration / sc.dt));
  double xs = 0.0, vs = sc.sv_speed0;
  double xl = sc.initial_gap + kVehicleLength, vl = sc.lead_speed0;
  const double decel = sc.kind == ScenarioKind::BrakingLead ? sc.lead_decel : 0.0;

  auto emit = [&](std::int64_t frame) {
    ingest::RawSample s;
    s.recording_id = "sim";
    s.trajectory_id = trajectory_id;
    s.frame = frame;
    s.time = static_cast<double>(frame) * sc.dt;
    s.agent_type = ingest::AgentType::Car;
    s.length = kVehicleLength;
    s.width = kVehicleWidth;
    s.lane_id = 1;
    ingest::RawSample l = s;
    s.agent_id = trajectory_id + "/sv";
    s.x = xs;
    s.vx = vs;
    s.sv_flag = true;
    l.agent_id = trajectory_id + "/lead";
    l.x = xl;
    l.vx = vl;
    d.samples.push_back(s);
    d.samples.push_back(l);
  };

  emit(0);
  for (std::int64_t f = 1; f <= steps; ++f) {
    const double gap = xl - xs - kVehicleLength;
    const double a = idm_accel(sv, vs, gap, vs - vl);
    xs += vs * sc.dt;
    xl += vl * sc.dt;
    vs = std::max(0.0, vs + a * sc.dt);
    vl = std::max(0.0, vl - decel * sc.dt);
    emit(f);
    if (xl - xs - kVehicleLength <= 0.0) {
      d.collision_events.push_back({trajectory_id, f});
      break;
    }
  }
  d.source_labels = d.collision_events;
  return d;
}

std::vector<ScenarioSpec> ncap_scenarios(std::uint64_t grid_seed) {
  std::mt19937_64 rng(geometry::mix_seed(grid_seed));
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  const double ttc[] = {0.8, 1.6, 2.4, 3.2};
  const double decel[] = {2.0, 4.0, 6.0};
  std::vector<ScenarioSpec> out;
  for (int i = 0; i < 16; ++i) {
    ScenarioSpec s;
    s.kind = ScenarioKind::StationaryLead;
    s.sv_speed0 = 10.0 + i;
    s.lead_speed0 = 0.0;
    s.initial_gap = ttc[i % 4] * s.sv_speed0 * (1.0 + jitter(rng));
    out.push_back(s);
  }
  for (int i = 0; i < 16; ++i) {
    ScenarioSpec s;
    s.kind = ScenarioKind::SlowerLead;
    s.sv_speed0 = 10.0 + i;
    s.lead_speed0 = 20.0 / 3.6;
    s.initial_gap = std::max(5.0, ttc[i % 4] * (s.sv_speed0 - s.lead_speed0)) * (1.0 + jitter(rng));
    out.push_back(s);
  }
  for (int i = 0; i < 16; ++i) {
    ScenarioSpec s;
    s.kind = ScenarioKind::BrakingLead;
    s.sv_speed0 = 10.0 + i;
    s.lead_speed0 = s.sv_speed0;
    s.lead_decel = decel[i % 3];
    // gap covers a 2 m/s^2 stop from the shared initial speed plus margin
    s.initial_gap = (s.sv_speed0 * s.sv_speed0 / 4.0 + 6.0) * (1.0 + jitter(rng));
    out.push_back(s);
  }
  return out;
}

ingest::Dataset ncap_battery(const IdmParams& sv, std::uint64_t grid_seed) {
  ingest::Dataset all;
  const auto specs = ncap_scenarios(grid_seed);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "ncap_%02zu", i);
    ingest::Dataset d = simulate_follow(sv, specs[i], id);
    all.dt = d.dt;
    all.samples.insert(all.samples.end(), d.samples.begin(), d.samples.end());
    all.collision_events.insert(all.collision_events.end(), d.collision_events.begin(), d.collision_events.end());
  }
  std::sort(all.collision_events.begin(), all.collision_events.end());
  all.source_labels = all.collision_events;
  return all;
}

}  // namespace safeset::sim
