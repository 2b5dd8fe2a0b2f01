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
#include "safeset/oss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "safeset/csv.hpp"
#include "safeset/error.hpp"

namespace safeset::oss {

using ingest::AgentType;
using ingest::Dataset;
using ingest::RawSample;

std::string to_string(OssKind kind) {
  switch (kind) {
    case OssKind::LeadFollowing: return "lead_following";
    case OssKind::MultiVehicle: return "multi_vehicle";
    case OssKind::VehiclePedestrian: return "vehicle_pedestrian";
    case OssKind::Combined: return "combined";
  }
  return "lead_following";
}

OssKind oss_kind_from_string(const std::string& text) {
  if (text == "lead_following") return OssKind::LeadFollowing;
  if (text == "multi_vehicle") return OssKind::MultiVehicle;
  if (text == "vehicle_pedestrian") return OssKind::VehiclePedestrian;
  if (text == "combined") return OssKind::Combined;
  throw Error(ErrorCode::InvalidSpec, "unknown OSS kind '" + text + "'");
}

int dimension_of(OssKind kind) {
  switch (kind) {
    case OssKind::LeadFollowing: return 3;
    case OssKind::MultiVehicle: return 13;
    case OssKind::VehiclePedestrian: return 5;
    case OssKind::Combined: return 17;
  }
  return 0;
}

namespace {

const char* kSubregions[6] = {"fl", "fc", "fr", "rl", "rc", "rr"};

}  // namespace

std::vector<Interval> OssSpec::bounds() const {
  const Interval v{v_min, v_max};
  const Interval p{p_min, p_max};
  const Interval p_ahead{0.0, p_max};
  const Interval q{0.0, q_max};
  std::vector<Interval> b;
  switch (kind) {
    case OssKind::LeadFollowing:
      b = {v, v, p_ahead};
      break;
    case OssKind::MultiVehicle:
    case OssKind::Combined:
      b.push_back(v);
      for (int i = 0; i < 6; ++i) {
        b.push_back(p);
        b.push_back(v);
      }
      if (kind == OssKind::Combined) b.insert(b.end(), {p_ahead, q, p_ahead, q});
      break;
    case OssKind::VehiclePedestrian:
      b = {v, p_ahead, q, p_ahead, q};
      break;
  }
  return b;
}

std::vector<std::string> OssSpec::dimension_names() const {
  std::vector<std::string> names;
  switch (kind) {
    case OssKind::LeadFollowing:
      return {"v0", "v1", "p"};
    case OssKind::MultiVehicle:
    case OssKind::Combined:
      names.push_back("v0");
      for (const char* r : kSubregions) {
        names.push_back(std::string("p_") + r);
        names.push_back(std::string("v_") + r);
      }
      if (kind == OssKind::Combined) names.insert(names.end(), {"p_left", "q_left", "p_right", "q_right"});
      return names;
    case OssKind::VehiclePedestrian:
      return {"v0", "p_left", "q_left", "p_right", "q_right"};
  }
  return names;
}

double OssSpec::volume() const {
  double vol = 1.0;
  for (const auto& iv : bounds()) vol *= iv.length();
  return vol;
}

void OssSpec::validate() const {
  for (const auto& iv : bounds()) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo)) {
      throw Error(ErrorCode::InvalidSpec, "OSS '" + name + "' has an empty or non-finite interval");
    }
  }
  if (!(lane_width > 0.0)) throw Error(ErrorCode::InvalidSpec, "lane_width must be positive");
  if (kind != OssKind::LeadFollowing && !(side_band.hi > side_band.lo && side_band.lo >= 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "side_band must be a nonempty interval of non-negative offsets");
  }
}

OssSpec preset(const std::string& name) {
  OssSpec s;
  s.name = name;
  if (name == "highd-lead") {
    s.kind = OssKind::LeadFollowing;
    s.p_min = 0.0, s.p_max = 50.0, s.v_min = 20.0, s.v_max = 35.0;
  } else if (name == "sumo-lead") {
    s.kind = OssKind::LeadFollowing;
    s.p_min = 0.0, s.p_max = 100.0, s.v_min = 0.0, s.v_max = 30.0;
  } else if (name == "ncap-lead") {
    s.kind = OssKind::LeadFollowing;
    s.p_min = 0.0, s.p_max = 40.0, s.v_min = 0.0, s.v_max = 25.0;
  } else if (name == "highd-multi") {
    s.kind = OssKind::MultiVehicle;
    s.p_min = -50.0, s.p_max = 50.0, s.v_min = 20.0, s.v_max = 30.0;
    s.lane_width = 3.75;
    s.side_band = {1.875, 5.625};
  } else if (name == "waymo-carla-17d" || name == "waymo-carla-multi" || name == "waymo-carla-ped") {
    s.kind = name == "waymo-carla-17d"     ? OssKind::Combined
             : name == "waymo-carla-multi" ? OssKind::MultiVehicle
                                           : OssKind::VehiclePedestrian;
    s.p_min = -50.0, s.p_max = 50.0, s.v_min = 1.0, s.v_max = 25.0;
    s.q_max = 10.0;
    s.lane_width = 5.0;
    s.side_band = {2.5, 10.0};
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown OSS preset '" + name + "'");
  }
  return s;
}

std::vector<std::string> preset_names() {
  return {"highd-lead", "sumo-lead", "ncap-lead", "highd-multi", "waymo-carla-17d", "waymo-carla-multi",
          "waymo-carla-ped"};
}

namespace {

struct Local {
  double lx = 0.0;  // forward
  double ly = 0.0;  // left
};

Local to_local(const RawSample& sv, double heading, const RawSample& o) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double dx = o.x - sv.x;
  const double dy = o.y - sv.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

double speed(const RawSample& s) { return std::hypot(s.vx, s.vy); }

bool is_vehicle(const RawSample& s) { return s.agent_type != AgentType::Pedestrian; }

struct FrameContext {
  const ingest::FrameGroup* group = nullptr;
  const RawSample* sv = nullptr;
  double heading = 0.0;
  bool unsafe = false;
};

// Walks all SV frames in order; `build` returns true (and fills values) when
// the frame yields a state. Consecutive emitted frames of one trajectory form
// a StateTrajectory; a frame gap starts a new one.
template <typename Build>
std::vector<StateTrajectory> walk_frames(const Dataset& d, const OssSpec& spec, Build build) {
  const auto heading = ingest::sample_headings(d);
  std::set<std::pair<std::string, std::int64_t>> collisions;
  for (const auto& e : d.collision_events) collisions.emplace(e.trajectory_id, e.frame);

  const auto box = spec.bounds();
  std::vector<StateTrajectory> out;
  std::int64_t last_frame = 0;
  for (const auto& g : ingest::group_frames(d)) {
    if (g.sv_index < 0) continue;
    FrameContext ctx;
    ctx.group = &g;
    ctx.sv = &d.samples[static_cast<std::size_t>(g.sv_index)];
    ctx.heading = heading[static_cast<std::size_t>(g.sv_index)];
    ctx.unsafe = collisions.count({g.trajectory_id, g.frame}) > 0;

    std::vector<double> values;
    if (!build(ctx, values)) continue;
    if (ctx.unsafe) {
      for (std::size_t k = 0; k < values.size(); ++k) values[k] = std::clamp(values[k], box[k].lo, box[k].hi);
    } else {
      bool inside = true;
      for (std::size_t k = 0; k < values.size(); ++k) inside = inside && box[k].contains(values[k]);
      if (!inside) continue;
    }

    OssState st{std::move(values), g.time, g.frame, g.trajectory_id, ctx.unsafe};
    const bool extend = !out.empty() && out.back().trajectory_id == g.trajectory_id && g.frame == last_frame + 1;
    if (extend) {
      out.back().gap_free.push_back(true);
    } else {
      out.push_back(StateTrajectory{g.trajectory_id, {}, {}});
    }
    out.back().states.push_back(std::move(st));
    last_frame = g.frame;
  }
  return out;
}

void require_kind(const OssSpec& spec, OssKind kind) {
  if (spec.kind != kind) {
    throw Error(ErrorCode::SpecKindMismatch, "expected a " + to_string(kind) + " spec, got " + to_string(spec.kind));
  }
}

bool same_lane(const RawSample& sv, const RawSample& o, const Local& l, double lane_width) {
  if (sv.lane_id && o.lane_id) return *sv.lane_id == *o.lane_id;
  return std::fabs(l.ly) <= 0.5 * lane_width;
}

enum class Side { None, Left, Center, Right };

Side side_of(const RawSample& sv, const RawSample& o, const Local& l, const OssSpec& spec) {
  if (sv.lane_id && o.lane_id) {
    const int dl = std::abs(*o.lane_id - *sv.lane_id);
    if (dl == 0) return Side::Center;
    if (dl != 1) return Side::None;
    return l.ly >= 0.0 ? Side::Left : Side::Right;
  }
  if (std::fabs(l.ly) <= 0.5 * spec.lane_width) return Side::Center;
  if (spec.side_band.contains(l.ly)) return Side::Left;
  if (spec.side_band.contains(-l.ly)) return Side::Right;
  return Side::None;
}

// v0 followed by (p, v) per subregion. Returns false when no subregion holds
// an in-bounds vehicle (a collision frame only needs some vehicle nearby).
bool multi_vehicle_values(const Dataset& d, const FrameContext& ctx, const OssSpec& spec,
                          std::vector<double>& values) {
  const RawSample& sv = *ctx.sv;
  const double v0 = speed(sv);
  struct Pick {
    int index = -1;
    double dist = std::numeric_limits<double>::infinity();
    Local local;
  };
  Pick picks[6];
  for (int i : ctx.group->members) {
    if (i == ctx.group->sv_index) continue;
    const auto& o = d.samples[static_cast<std::size_t>(i)];
    if (!is_vehicle(o)) continue;
    const Local l = to_local(sv, ctx.heading, o);
    const Side side = side_of(sv, o, l, spec);
    if (side == Side::None) continue;
    const int col = side == Side::Left ? 0 : side == Side::Center ? 1 : 2;
    const int region = (l.lx >= 0.0 ? 0 : 3) + col;
    const double dist = std::hypot(l.lx, l.ly);
    if (dist < picks[region].dist) picks[region] = {i, dist, l};
  }

  values.assign(13, 0.0);
  values[0] = v0;
  bool any_in_bounds = false;
  bool any_vehicle = false;
  for (int r = 0; r < 6; ++r) {
    const bool front = r < 3;
    double p = front ? spec.p_max : spec.p_min;
    double v = v0;
    if (picks[r].index >= 0) {
      any_vehicle = true;
      const auto& o = d.samples[static_cast<std::size_t>(picks[r].index)];
      const double half = 0.5 * (sv.length + o.length);
      const double clearance = std::fabs(picks[r].local.lx) - half;
      const double cand_p = clearance <= 0.0 ? 0.0 : (front ? clearance : -clearance);
      const double cand_v = speed(o);
      const bool in = cand_p >= spec.p_min && cand_p <= spec.p_max && cand_v >= spec.v_min && cand_v <= spec.v_max;
      if (in || ctx.unsafe) {
        p = cand_p;
        v = cand_v;
        any_in_bounds = any_in_bounds || in;
      }
    }
    values[static_cast<std::size_t>(1 + 2 * r)] = p;
    values[static_cast<std::size_t>(2 + 2 * r)] = v;
  }
  return ctx.unsafe ? any_vehicle : any_in_bounds;
}

bool pedestrian_values(const Dataset& d, const FrameContext& ctx, const OssSpec& spec, std::vector<double>& values) {
  const RawSample& sv = *ctx.sv;
  const double half_l = 0.5 * sv.length;
  const double corner_y[2] = {0.5 * sv.width, -0.5 * sv.width};  // front-left, front-right

  double best_dist[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double best_p[2] = {spec.p_max, spec.p_max};
  double best_q[2] = {spec.q_max, spec.q_max};
  bool found[2] = {false, false};
  for (int i : ctx.group->members) {
    const auto& o = d.samples[static_cast<std::size_t>(i)];
    if (o.agent_type != AgentType::Pedestrian) continue;
    const Local l = to_local(sv, ctx.heading, o);
    if (!(l.lx > half_l)) continue;  // strictly ahead of the front bumper line
    const double dl = std::hypot(l.lx - half_l, l.ly - corner_y[0]);
    const double dr = std::hypot(l.lx - half_l, l.ly - corner_y[1]);
    const int c = dl <= dr ? 0 : 1;
    const double p = l.lx - half_l;
    const double q = std::fabs(l.ly - corner_y[c]);
    const bool in = p <= spec.p_max && q <= spec.q_max;
    if (!in && !ctx.unsafe) continue;
    const double dist = c == 0 ? dl : dr;
    if (dist < best_dist[c]) {
      best_dist[c] = dist;
      best_p[c] = p;
      best_q[c] = q;
      found[c] = true;
    }
  }
  values = {speed(sv), best_p[0], best_q[0], best_p[1], best_q[1]};
  return found[0] || found[1];
}

}  // namespace

std::vector<StateTrajectory> extract_lead_following(const Dataset& d, const OssSpec& spec) {
  require_kind(spec, OssKind::LeadFollowing);
  return walk_frames(d, spec, [&](const FrameContext& ctx, std::vector<double>& values) {
    const RawSample& sv = *ctx.sv;
    int leader = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i : ctx.group->members) {
      if (i == ctx.group->sv_index) continue;
      const auto& o = d.samples[static_cast<std::size_t>(i)];
      if (!is_vehicle(o)) continue;
      const Local l = to_local(sv, ctx.heading, o);
      if (l.lx <= 0.0 || !same_lane(sv, o, l, spec.lane_width)) continue;
      if (l.lx < best) {
        best = l.lx;
        leader = i;
      }
    }
    if (leader < 0) return false;
    const auto& lead = d.samples[static_cast<std::size_t>(leader)];
    const double gap = best - 0.5 * (sv.length + lead.length);
    values = {speed(sv), speed(lead), gap};
    return true;
  });
}

std::vector<StateTrajectory> extract_multi_vehicle(const Dataset& d, const OssSpec& spec) {
  require_kind(spec, OssKind::MultiVehicle);
  return walk_frames(d, spec, [&](const FrameContext& ctx, std::vector<double>& values) {
    return multi_vehicle_values(d, ctx, spec, values);
  });
}

std::vector<StateTrajectory> extract_vehicle_pedestrian(const Dataset& d, const OssSpec& spec) {
  require_kind(spec, OssKind::VehiclePedestrian);
  return walk_frames(d, spec, [&](const FrameContext& ctx, std::vector<double>& values) {
    return pedestrian_values(d, ctx, spec, values);
  });
}

std::vector<StateTrajectory> combine_domains(const std::vector<StateTrajectory>& vehicle,
                                             const std::vector<StateTrajectory>& pedestrian) {
  std::map<std::pair<std::string, std::int64_t>, const OssState*> ped;
  for (const auto& t : pedestrian) {
    for (const auto& s : t.states) {
      if (s.values.size() != 5) throw Error(ErrorCode::DimensionMismatch, "pedestrian states must be 5-d");
      ped[{s.trajectory_id, s.frame}] = &s;
    }
  }
  std::vector<StateTrajectory> out;
  for (const auto& t : vehicle) {
    bool open = false;
    std::int64_t last = 0;
    for (const auto& s : t.states) {
      if (s.values.size() != 13) throw Error(ErrorCode::DimensionMismatch, "vehicle states must be 13-d");
      auto it = ped.find({s.trajectory_id, s.frame});
      if (it == ped.end()) {
        open = false;
        continue;
      }
      const OssState& q = *it->second;
      if (q.values[0] != s.values[0] || q.time != s.time) {
        throw Error(ErrorCode::FrameMisalignment, "trajectory '" + s.trajectory_id + "' frame " +
                                                      std::to_string(s.frame) + ": v0 or time disagree");
      }
      OssState c = s;
      c.values.insert(c.values.end(), q.values.begin() + 1, q.values.end());
      c.unsafe = s.unsafe || q.unsafe;
      if (open && s.frame == last + 1) {
        out.back().gap_free.push_back(true);
      } else {
        out.push_back(StateTrajectory{s.trajectory_id, {}, {}});
      }
      out.back().states.push_back(std::move(c));
      open = true;
      last = s.frame;
    }
  }
  return out;
}

std::vector<StateTrajectory> extract(const Dataset& d, const OssSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case OssKind::LeadFollowing: return extract_lead_following(d, spec);
    case OssKind::MultiVehicle: return extract_multi_vehicle(d, spec);
    case OssKind::VehiclePedestrian: return extract_vehicle_pedestrian(d, spec);
    case OssKind::Combined: {
      OssSpec mv = spec;
      mv.kind = OssKind::MultiVehicle;
      OssSpec pd = spec;
      pd.kind = OssKind::VehiclePedestrian;
      return combine_domains(extract_multi_vehicle(d, mv), extract_vehicle_pedestrian(d, pd));
    }
  }
  return {};
}

TransitionSet transitions(const std::vector<StateTrajectory>& ts) {
  TransitionSet td;
  for (const auto& t : ts) {
    for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
      const bool linked = i < t.gap_free.size() ? static_cast<bool>(t.gap_free[i]) : false;
      if (linked) td.pairs.push_back({t.states[i], t.states[i + 1]});
    }
  }
  return td;
}

std::string states_to_csv(const std::vector<StateTrajectory>& ts, const OssSpec& spec) {
  std::ostringstream out;
  out << "trajectory_id,frame,time,unsafe";
  for (const auto& n : spec.dimension_names()) out << ',' << n;
  out << '\n';
  for (const auto& t : ts) {
    for (const auto& s : t.states) {
      out << csv::escape(s.trajectory_id) << ',' << s.frame << ',' << csv::format_double(s.time) << ','
          << (s.unsafe ? 1 : 0);
      for (double v : s.values) out << ',' << csv::format_double(v);
      out << '\n';
    }
  }
  return out.str();
}

void write_states_csv(const std::vector<StateTrajectory>& ts, const OssSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << states_to_csv(ts, spec);
}

}  // namespace safeset::oss
