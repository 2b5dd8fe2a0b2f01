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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace safeset::ingest {

enum class AgentType { Car, Truck, Pedestrian, Other };

std::string to_string(AgentType type);
AgentType agent_type_from_string(const std::string& text);

/// One row of a recording: a single agent at a single frame.
struct RawSample {
  std::string recording_id;
  std::string trajectory_id;
  std::int64_t frame = 0;
  double time = 0.0;  // seconds
  std::string agent_id;
  AgentType agent_type = AgentType::Car;
  double x = 0.0, y = 0.0;    // world frame, meters
  double vx = 0.0, vy = 0.0;  // meters/second
  double length = 0.0, width = 0.0;
  std::optional<int> lane_id;
  bool sv_flag = false;

  bool operator==(const RawSample&) const = default;
};

struct CollisionEvent {
  std::string trajectory_id;
  std::int64_t frame = 0;

  auto operator<=>(const CollisionEvent&) const = default;
};

/// Immutable after construction; safe to share read-only across threads.
struct Dataset {
  std::vector<RawSample> samples;
  double dt = 0.0;  // nominal sampling period, seconds
  std::vector<CollisionEvent> collision_events;  // sorted, unique
  std::vector<CollisionEvent> source_labels;     // labels as supplied
  std::vector<std::string> warnings;             // e.g. rejected tracks

  bool operator==(const Dataset& o) const {
    return samples == o.samples && dt == o.dt && collision_events == o.collision_events;
  }
};

/// Maps canonical column names (recording_id, trajectory_id, frame, time,
/// agent_id, agent_type, x, y, vx, vy, length, width, lane_id, sv_flag) to the
/// header names used by a particular export.
struct SchemaOptions {
  std::map<std::string, std::string> columns;

  /// Parses "name=header" as given to `--col`.
  void add_mapping(const std::string& assignment);
  std::string header_for(const std::string& canonical) const;
};

std::vector<std::string> canonical_columns();

/// Reads a flat per-(frame, agent) CSV. dt is the median per-frame time step;
/// tracks where more than 1% of steps deviate from it by over 10% are
/// dropped (listed in `warnings`).
Dataset parse_trajectory_csv(const std::string& path, const SchemaOptions& schema = {});
Dataset parse_trajectory_csv_text(const std::string& text, const SchemaOptions& schema = {});

/// Writes the canonical column layout; parse_trajectory_csv round-trips it.
void write_dataset_csv(const Dataset& d, const std::string& path);
std::string dataset_to_csv(const Dataset& d);

/// Sidecar label file with header `trajectory_id,frame`.
std::vector<CollisionEvent> load_collision_labels(const std::string& path);
void write_collision_labels(const std::vector<CollisionEvent>& events, const std::string& path);

/// Attaches labels, validating that each references an existing
/// (trajectory_id, frame). Throws InvalidDataset otherwise.
Dataset with_labels(Dataset d, const std::vector<CollisionEvent>& labels);

enum class CollisionRule { LabelsOnly, GeometricOverlap, Either };

CollisionRule collision_rule_from_string(const std::string& text);
std::string to_string(CollisionRule rule);

/// labels_only keeps the supplied labels, geometric_overlap replaces them by
/// the first box overlap per trajectory, either takes the union. The source
/// labels are retained separately so the operation is idempotent.
Dataset label_collisions(const Dataset& d, CollisionRule rule);

/// Heading (radians) for every sample, index-aligned with `d.samples`. Taken
/// from the velocity direction; below 0.01 m/s the agent's previous heading
/// is reused, and an agent that has never moved faces +x.
std::vector<double> sample_headings(const Dataset& d);

/// Indices of samples grouped by (trajectory_id, frame), each group in input
/// order, groups ordered by trajectory first appearance then frame.
struct FrameGroup {
  std::string trajectory_id;
  std::int64_t frame = 0;
  double time = 0.0;
  int sv_index = -1;  // index into samples
  std::vector<int> members;
};
std::vector<FrameGroup> group_frames(const Dataset& d);

}  // namespace safeset::ingest
