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
#include "safeset/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "safeset/csv.hpp"
#include "safeset/error.hpp"

namespace safeset::ingest {

namespace {

constexpr double kStillSpeed = 0.01;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_bool(const std::string& text, bool* ok) {
  const std::string t = lower(csv::trim(text));
  *ok = true;
  if (t == "1" || t == "true" || t == "yes" || t == "t") return true;
  if (t == "0" || t == "false" || t == "no" || t == "f" || t.empty()) return false;
  *ok = false;
  return false;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lo);
  }
  return m;
}

using TrackKey = std::pair<std::string, std::string>;  // (trajectory_id, agent_id)

struct TrackKeyHash {
  std::size_t operator()(const TrackKey& k) const {
    return std::hash<std::string>()(k.first) * 31u ^ std::hash<std::string>()(k.second);
  }
};

// Per track, sample indices in file order.
std::vector<std::vector<int>> tracks_of(const std::vector<RawSample>& samples) {
  std::unordered_map<TrackKey, int, TrackKeyHash> index;
  std::vector<std::vector<int>> tracks;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    auto [it, inserted] = index.try_emplace({s.trajectory_id, s.agent_id}, static_cast<int>(tracks.size()));
    if (inserted) tracks.emplace_back();
    tracks[static_cast<std::size_t>(it->second)].push_back(i);
  }
  return tracks;
}

Dataset finalize(std::vector<RawSample> samples) {
  Dataset d;
  auto tracks = tracks_of(samples);

  for (const auto& track : tracks) {
    for (std::size_t k = 1; k < track.size(); ++k) {
      const auto& a = samples[static_cast<std::size_t>(track[k - 1])];
      const auto& b = samples[static_cast<std::size_t>(track[k])];
      if (b.frame <= a.frame || b.time <= a.time) {
        throw Error(ErrorCode::NonMonotoneTime,
                    "trajectory '" + a.trajectory_id + "', agent '" + a.agent_id + "' at frame " +
                        std::to_string(b.frame));
      }
    }
  }

  std::vector<double> steps;
  for (const auto& track : tracks) {
    for (std::size_t k = 1; k < track.size(); ++k) {
      const auto& a = samples[static_cast<std::size_t>(track[k - 1])];
      const auto& b = samples[static_cast<std::size_t>(track[k])];
      steps.push_back((b.time - a.time) / static_cast<double>(b.frame - a.frame));
    }
  }
  d.dt = median(steps);

  std::vector<char> keep(samples.size(), 1);
  if (d.dt > 0.0) {
    for (const auto& track : tracks) {
      if (track.size() < 2) continue;
      std::size_t bad = 0;
      for (std::size_t k = 1; k < track.size(); ++k) {
        const auto& a = samples[static_cast<std::size_t>(track[k - 1])];
        const auto& b = samples[static_cast<std::size_t>(track[k])];
        const double expected = d.dt * static_cast<double>(b.frame - a.frame);
        if (std::fabs((b.time - a.time) - expected) > 0.1 * d.dt) ++bad;
      }
      if (static_cast<double>(bad) > 0.01 * static_cast<double>(track.size() - 1)) {
        const auto& s = samples[static_cast<std::size_t>(track.front())];
        d.warnings.push_back("rejected track (" + s.trajectory_id + ", " + s.agent_id + "): " +
                             std::to_string(bad) + " steps off the nominal period");
        for (int i : track) keep[static_cast<std::size_t>(i)] = 0;
      }
    }
  }

  d.samples.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) d.samples.push_back(std::move(samples[i]));
  }

  // Exactly one subject vehicle per trajectory.
  std::map<std::string, std::set<std::string>> svs;
  std::vector<std::string> order;
  for (const auto& s : d.samples) {
    auto [it, inserted] = svs.try_emplace(s.trajectory_id);
    if (inserted) order.push_back(s.trajectory_id);
    if (s.sv_flag) it->second.insert(s.agent_id);
  }
  for (const auto& tid : order) {
    const auto n = svs[tid].size();
    if (n != 1) {
      throw Error(ErrorCode::InvalidDataset, "trajectory '" + tid + "' has " + std::to_string(n) +
                                                 " subject vehicles (expected exactly one)");
    }
  }
  return d;
}

}  // namespace

std::string to_string(AgentType type) {
  switch (type) {
    case AgentType::Car: return "car";
    case AgentType::Truck: return "truck";
    case AgentType::Pedestrian: return "pedestrian";
    case AgentType::Other: return "other";
  }
  return "other";
}

AgentType agent_type_from_string(const std::string& text) {
  const std::string t = lower(csv::trim(text));
  if (t == "car") return AgentType::Car;
  if (t == "truck" || t == "bus") return AgentType::Truck;
  if (t == "pedestrian" || t == "ped") return AgentType::Pedestrian;
  return AgentType::Other;
}

std::vector<std::string> canonical_columns() {
  return {"recording_id", "trajectory_id", "frame", "time",   "agent_id", "agent_type", "x",
          "y",            "vx",            "vy",    "length", "width",    "lane_id",    "sv_flag"};
}

void SchemaOptions::add_mapping(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::InvalidConfig, "column mapping must look like name=header: '" + assignment + "'");
  }
  const std::string name = csv::trim(assignment.substr(0, eq));
  const auto cols = canonical_columns();
  if (std::find(cols.begin(), cols.end(), name) == cols.end()) {
    throw Error(ErrorCode::InvalidConfig, "unknown column name '" + name + "'");
  }
  columns[name] = csv::trim(assignment.substr(eq + 1));
}

std::string SchemaOptions::header_for(const std::string& canonical) const {
  auto it = columns.find(canonical);
  return it == columns.end() ? canonical : it->second;
}

Dataset parse_trajectory_csv_text(const std::string& text, const SchemaOptions& schema) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    header = csv::split_line(line);
    for (auto& h : header) h = csv::trim(h);
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::MissingColumn, "no header row");

  auto find_col = [&](const std::string& name) -> int {
    const std::string h = schema.header_for(name);
    auto it = std::find(header.begin(), header.end(), h);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };

  const std::vector<std::string> required = {"trajectory_id", "frame", "time", "agent_id", "x",
                                             "y",             "vx",    "vy",   "sv_flag"};
  std::map<std::string, int> col;
  for (const auto& name : canonical_columns()) col[name] = find_col(name);
  for (const auto& name : required) {
    if (col[name] < 0) throw Error(ErrorCode::MissingColumn, schema.header_for(name));
  }

  std::vector<RawSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_line(line);
    auto field = [&](const std::string& name) -> std::string {
      const int c = col[name];
      if (c < 0) return {};
      if (c >= static_cast<int>(fields.size())) {
        throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": missing field '" + name + "'");
      }
      return csv::trim(fields[static_cast<std::size_t>(c)]);
    };
    auto real = [&](const std::string& name, double fallback) -> double {
      const std::string t = field(name);
      if (t.empty() && col[name] < 0) return fallback;
      bool ok = false;
      const double v = csv::parse_double(t, &ok);
      if (!ok || !std::isfinite(v)) {
        throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": bad number in '" + name + "'");
      }
      return v;
    };

    RawSample s;
    s.recording_id = col["recording_id"] >= 0 ? field("recording_id") : std::string("0");
    s.trajectory_id = field("trajectory_id");
    s.agent_id = field("agent_id");
    if (s.trajectory_id.empty() || s.agent_id.empty()) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": empty identifier");
    }
    bool ok = false;
    s.frame = csv::parse_int(field("frame"), &ok);
    if (!ok || s.frame < 0) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": bad frame");
    }
    s.time = real("time", 0.0);
    s.agent_type = col["agent_type"] >= 0 ? agent_type_from_string(field("agent_type")) : AgentType::Car;
    s.x = real("x", 0.0);
    s.y = real("y", 0.0);
    s.vx = real("vx", 0.0);
    s.vy = real("vy", 0.0);
    s.length = real("length", 0.0);
    s.width = real("width", 0.0);
    if (s.length < 0.0 || s.width < 0.0) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": negative extent");
    }
    if (col["lane_id"] >= 0) {
      const std::string t = field("lane_id");
      if (!t.empty()) {
        const long long lane = csv::parse_int(t, &ok);
        if (!ok) throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": bad lane_id");
        s.lane_id = static_cast<int>(lane);
      }
    }
    s.sv_flag = parse_bool(field("sv_flag"), &ok);
    if (!ok) throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": bad sv_flag");
    samples.push_back(std::move(s));
  }
  return finalize(std::move(samples));
}

Dataset parse_trajectory_csv(const std::string& path, const SchemaOptions& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trajectory_csv_text(buf.str(), schema);
}

std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream out;
  const auto cols = canonical_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& s : d.samples) {
    out << csv::escape(s.recording_id) << ',' << csv::escape(s.trajectory_id) << ',' << s.frame << ','
        << csv::format_double(s.time) << ',' << csv::escape(s.agent_id) << ',' << to_string(s.agent_type) << ','
        << csv::format_double(s.x) << ',' << csv::format_double(s.y) << ',' << csv::format_double(s.vx) << ','
        << csv::format_double(s.vy) << ',' << csv::format_double(s.length) << ','
        << csv::format_double(s.width) << ',' << (s.lane_id ? std::to_string(*s.lane_id) : std::string()) << ','
        << (s.sv_flag ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << dataset_to_csv(d);
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

std::vector<CollisionEvent> load_collision_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  int tcol = -1;
  int fcol = -1;
  std::vector<CollisionEvent> events;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split_line(line);
    for (auto& f : fields) f = csv::trim(f);
    if (tcol < 0) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "trajectory_id") tcol = static_cast<int>(i);
        if (fields[i] == "frame") fcol = static_cast<int>(i);
      }
      if (tcol < 0) throw Error(ErrorCode::MissingColumn, "trajectory_id");
      if (fcol < 0) throw Error(ErrorCode::MissingColumn, "frame");
      continue;
    }
    if (std::max(tcol, fcol) >= static_cast<int>(fields.size())) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": too few fields");
    }
    bool ok = false;
    CollisionEvent e{fields[static_cast<std::size_t>(tcol)], csv::parse_int(fields[static_cast<std::size_t>(fcol)], &ok)};
    if (!ok) throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": bad frame");
    events.push_back(std::move(e));
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  return events;
}

void write_collision_labels(const std::vector<CollisionEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << "trajectory_id,frame\n";
  for (const auto& e : events) out << csv::escape(e.trajectory_id) << ',' << e.frame << '\n';
}

Dataset with_labels(Dataset d, const std::vector<CollisionEvent>& labels) {
  std::set<std::pair<std::string, std::int64_t>> frames;
  for (const auto& s : d.samples) frames.emplace(s.trajectory_id, s.frame);
  for (const auto& e : labels) {
    if (!frames.count({e.trajectory_id, e.frame})) {
      throw Error(ErrorCode::InvalidDataset, "collision label references unknown (trajectory '" +
                                                 e.trajectory_id + "', frame " + std::to_string(e.frame) + ")");
    }
  }
  std::vector<CollisionEvent> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  d.source_labels = sorted;
  d.collision_events = std::move(sorted);
  return d;
}

CollisionRule collision_rule_from_string(const std::string& text) {
  const std::string t = lower(text);
  if (t == "labels_only" || t == "labels") return CollisionRule::LabelsOnly;
  if (t == "geometric_overlap" || t == "geometric") return CollisionRule::GeometricOverlap;
  if (t == "either") return CollisionRule::Either;
  throw Error(ErrorCode::InvalidConfig, "unknown collision rule '" + text + "'");
}

std::string to_string(CollisionRule rule) {
  switch (rule) {
    case CollisionRule::LabelsOnly: return "labels_only";
    case CollisionRule::GeometricOverlap: return "geometric_overlap";
    case CollisionRule::Either: return "either";
  }
  return "either";
}

std::vector<double> sample_headings(const Dataset& d) {
  std::vector<double> heading(d.samples.size(), 0.0);
  for (const auto& track : tracks_of(d.samples)) {
    double last = 0.0;
    for (int i : track) {
      const auto& s = d.samples[static_cast<std::size_t>(i)];
      if (std::hypot(s.vx, s.vy) >= kStillSpeed) last = std::atan2(s.vy, s.vx);
      heading[static_cast<std::size_t>(i)] = last;
    }
  }
  return heading;
}

std::vector<FrameGroup> group_frames(const Dataset& d) {
  std::unordered_map<std::string, int> traj_rank;
  for (const auto& s : d.samples) traj_rank.try_emplace(s.trajectory_id, static_cast<int>(traj_rank.size()));

  std::map<std::pair<int, std::int64_t>, FrameGroup> groups;
  for (int i = 0; i < static_cast<int>(d.samples.size()); ++i) {
    const auto& s = d.samples[static_cast<std::size_t>(i)];
    auto& g = groups[{traj_rank[s.trajectory_id], s.frame}];
    if (g.members.empty()) {
      g.trajectory_id = s.trajectory_id;
      g.frame = s.frame;
      g.time = s.time;
    }
    g.members.push_back(i);
    if (s.sv_flag) g.sv_index = i;
  }
  std::vector<FrameGroup> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

namespace {

struct Box {
  double xmin, xmax, ymin, ymax;
};

// Box of `other` in the SV's heading-aligned frame: the axis-aligned bounds
// of its own (heading-rotated) rectangle.
Box local_box(const RawSample& sv, double sv_heading, const RawSample& other, double other_heading) {
  const double c = std::cos(sv_heading);
  const double s = std::sin(sv_heading);
  const double dx = other.x - sv.x;
  const double dy = other.y - sv.y;
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  const double rel = other_heading - sv_heading;
  const double hl = 0.5 * other.length;
  const double hw = 0.5 * other.width;
  const double ex = std::fabs(std::cos(rel)) * hl + std::fabs(std::sin(rel)) * hw;
  const double ey = std::fabs(std::sin(rel)) * hl + std::fabs(std::cos(rel)) * hw;
  return {lx - ex, lx + ex, ly - ey, ly + ey};
}

}  // namespace

Dataset label_collisions(const Dataset& d, CollisionRule rule) {
  Dataset out = d;
  std::vector<CollisionEvent> events;
  if (rule != CollisionRule::GeometricOverlap) events = d.source_labels;

  if (rule != CollisionRule::LabelsOnly) {
    const auto heading = sample_headings(d);
    std::set<std::string> hit;
    for (const auto& g : group_frames(d)) {
      if (g.sv_index < 0 || hit.count(g.trajectory_id)) continue;
      const auto& sv = d.samples[static_cast<std::size_t>(g.sv_index)];
      const double h0 = heading[static_cast<std::size_t>(g.sv_index)];
      const Box mine{-0.5 * sv.length, 0.5 * sv.length, -0.5 * sv.width, 0.5 * sv.width};
      for (int i : g.members) {
        if (i == g.sv_index) continue;
        const auto& o = d.samples[static_cast<std::size_t>(i)];
        const Box b = local_box(sv, h0, o, heading[static_cast<std::size_t>(i)]);
        const double ox = std::min(mine.xmax, b.xmax) - std::max(mine.xmin, b.xmin);
        const double oy = std::min(mine.ymax, b.ymax) - std::max(mine.ymin, b.ymin);
        if (ox > 0.0 && oy > 0.0) {
          events.push_back({g.trajectory_id, g.frame});
          hit.insert(g.trajectory_id);
          break;
        }
      }
    }
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  out.collision_events = std::move(events);
  return out;
}

}  // namespace safeset::ingest
