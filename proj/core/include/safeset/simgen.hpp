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
#include <string>
#include <vector>

#include "safeset/ingest.hpp"

namespace safeset::sim {

struct IdmParams {
  double s0 = 2.0;       // minimum gap, m
  double T = 1.5;        // time headway, s
  double b_max = 9.0;    // braking limit, m/s^2
  double v_free = 25.0;  // desired speed, m/s
  double a_max = 0.73;   // m/s^2
  double b_comf = 1.67;  // m/s^2
  double delta = 4.0;

  void validate() const;
  bool operator==(const IdmParams&) const = default;
};

IdmParams idm0();
IdmParams idm1();
/// "idm0" or "idm1".
IdmParams policy_preset(const std::string& name);
/// JSON object with any of s0, T, b_max, v_free, a_max, b_comf, delta;
/// missing keys fall back to IDM_1.
IdmParams policy_from_json(const std::string& text);

enum class ScenarioKind { StationaryLead, SlowerLead, BrakingLead };
std::string to_string(ScenarioKind kind);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::StationaryLead;
  double sv_speed0 = 10.0;
  double lead_speed0 = 0.0;
  double initial_gap = 50.0;  // bumper to bumper
  double lead_decel = 0.0;
  double duration = 15.0;
  double dt = 0.04;

  void validate() const;
};

constexpr double kVehicleLength = 4.5;
constexpr double kVehicleWidth = 1.8;

/// Free-road IDM acceleration clamped to [-b_max, a_max]. dv is the closing
/// speed v - v_lead. Throws NonPositiveGap.
double idm_accel(const IdmParams& p, double v, double gap, double dv);

/// Forward-Euler car following behind a scripted lead. Stops at `duration`
/// or at the first frame with gap <= 0, which is recorded as a collision.
ingest::Dataset simulate_follow(const IdmParams& sv, const ScenarioSpec& sc, const std::string& trajectory_id = "t00");

/// 16 stationary, 16 slower and 16 braking lead cells; initial gaps carry a
/// seeded +-2% jitter.
std::vector<ScenarioSpec> ncap_scenarios(std::uint64_t grid_seed);
ingest::Dataset ncap_battery(const IdmParams& sv, std::uint64_t grid_seed);

}  // namespace safeset::sim
