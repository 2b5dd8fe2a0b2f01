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
#include <utility>
#include <vector>

#include "safeset/ingest.hpp"

namespace safeset::oss {

enum class OssKind { LeadFollowing, MultiVehicle, VehiclePedestrian, Combined };

std::string to_string(OssKind kind);
OssKind oss_kind_from_string(const std::string& text);
int dimension_of(OssKind kind);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Operational state space: the kind fixes the coordinate layout, the scalar
/// parameters fix the per-dimension box.
///
///   lead_following      (v0, v1, p)                     p in [0, p_max]
///   multi_vehicle       (v0, p_fl, v_fl, p_fc, v_fc, p_fr, v_fr,
///                            p_rl, v_rl, p_rc, v_rc, p_rr, v_rr)
///                       p in [p_min, p_max]; rear clearances are negative
///   vehicle_pedestrian  (v0, p_left, q_left, p_right, q_right)
///   combined            multi_vehicle followed by the four pedestrian terms
struct OssSpec {
  OssKind kind = OssKind::LeadFollowing;
  std::string name;  // preset name, or "custom"
  double p_min = 0.0;
  double p_max = 50.0;
  double v_min = 0.0;
  double v_max = 35.0;
  double q_max = 10.0;
  double lane_width = 3.75;
  Interval side_band{1.875, 5.625};

  int dimension() const { return dimension_of(kind); }
  std::vector<Interval> bounds() const;
  std::vector<std::string> dimension_names() const;
  /// Product of interval lengths (physical units).
  double volume() const;
  /// Throws InvalidSpec when any interval is empty or not finite.
  void validate() const;
};

/// Presets: highd-lead, sumo-lead, ncap-lead, highd-multi, waymo-carla-17d,
/// plus waymo-carla-multi and waymo-carla-ped for the two halves of the 17-d
/// space.
OssSpec preset(const std::string& name);
std::vector<std::string> preset_names();

struct OssState {
  std::vector<double> values;
  double time = 0.0;
  std::int64_t frame = 0;
  std::string trajectory_id;
  bool unsafe = false;

  bool operator==(const OssState&) const = default;
};

/// Time-ordered states of one subject vehicle. gap_free[i] says whether
/// states i and i+1 came from consecutive frames.
struct StateTrajectory {
  std::string trajectory_id;
  std::vector<OssState> states;
  std::vector<bool> gap_free;

  int dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().values.size()); }
};

struct Transition {
  OssState from;
  OssState to;
};

struct TransitionSet {
  std::vector<Transition> pairs;
  std::int64_t safe_count = 0;    // s, once labeled
  std::int64_t unsafe_count = 0;  // c, once labeled

  std::size_t size() const { return pairs.size(); }
};

// Collision-labeled frames are always emitted, with their coordinates clamped
// into the box: C is a subset of S, and dropping them would silently turn an
// unsafe trajectory into a safe one.
std::vector<StateTrajectory> extract_lead_following(const ingest::Dataset& d, const OssSpec& spec);
std::vector<StateTrajectory> extract_multi_vehicle(const ingest::Dataset& d, const OssSpec& spec);
std::vector<StateTrajectory> extract_vehicle_pedestrian(const ingest::Dataset& d, const OssSpec& spec);

/// Joins a 13-d and a 5-d extraction frame by frame (shared v0 stored once).
std::vector<StateTrajectory> combine_domains(const std::vector<StateTrajectory>& vehicle,
                                             const std::vector<StateTrajectory>& pedestrian);

/// Dispatches on spec.kind; for Combined runs both halves and joins them.
std::vector<StateTrajectory> extract(const ingest::Dataset& d, const OssSpec& spec);

/// All gap-free consecutive pairs, in trajectory order.
TransitionSet transitions(const std::vector<StateTrajectory>& ts);

std::string states_to_csv(const std::vector<StateTrajectory>& ts, const OssSpec& spec);
void write_states_csv(const std::vector<StateTrajectory>& ts, const OssSpec& spec, const std::string& path);

}  // namespace safeset::oss
