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
#include "safeset/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "safeset/error.hpp"

namespace safeset::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base, const std::string& path) {
  if (base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

template <typename T>
T get(const json& j, const char* key, const char* type_name) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("config key '") + key + "' must be " + type_name);
  }
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const json& v = j.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw Error(ErrorCode::InvalidConfig, std::string("config key '") + key + "' must be a list of paths");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(ErrorCode::InvalidConfig, std::string("config key '") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

oss::OssSpec parse_oss(const json& j) {
  if (j.is_string()) return oss::preset(j.get<std::string>());
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "'oss' must be a preset name or an object");
  oss::OssSpec s = j.contains("preset") ? oss::preset(get<std::string>(j, "preset", "a string")) : oss::OssSpec{};
  if (!j.contains("preset")) s.name = j.contains("name") ? get<std::string>(j, "name", "a string") : "custom";
  if (j.contains("kind")) s.kind = oss::oss_kind_from_string(get<std::string>(j, "kind", "a string"));
  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = get<double>(j, key, "a number");
  };
  num("p_min", s.p_min);
  num("p_max", s.p_max);
  num("v_min", s.v_min);
  num("v_max", s.v_max);
  num("q_max", s.q_max);
  num("lane_width", s.lane_width);
  if (j.contains("side_band")) {
    const auto band = get<std::vector<double>>(j, "side_band", "a pair of numbers");
    if (band.size() != 2) throw Error(ErrorCode::InvalidConfig, "'side_band' must hold two numbers");
    s.side_band = {band[0], band[1]};
  }
  return s;
}

json oss_json(const oss::OssSpec& s) {
  return json{{"kind", oss::to_string(s.kind)},
              {"name", s.name},
              {"p_min", s.p_min},
              {"p_max", s.p_max},
              {"v_min", s.v_min},
              {"v_max", s.v_max},
              {"q_max", s.q_max},
              {"lane_width", s.lane_width},
              {"side_band", {s.side_band.lo, s.side_band.hi}}};
}

}  // namespace

void AnalysisConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::InvalidBeta, "beta must lie in (0,1), got " + std::to_string(beta));
  if (!(alpha_lo > 0.0 && alpha_hi > alpha_lo)) throw Error(ErrorCode::InvalidConfig, "alpha bounds need 0 < lo < hi");
  if (!(alpha_threshold > 0.0)) throw Error(ErrorCode::InvalidConfig, "alpha threshold must be positive");
  if (match_radius < 0.0) throw Error(ErrorCode::InvalidConfig, "match radius must be non-negative");
  if (max_exact_dim < 1 || max_exact_dim > 6) throw Error(ErrorCode::InvalidConfig, "max_exact_dim must lie in [1, 6]");
  if (cluster_max && *cluster_max < static_cast<std::size_t>(oss.dimension() + 1)) {
    throw Error(ErrorCode::InvalidConfig, "cluster_max must be at least dimension + 1");
  }
  if (mc_samples < 1000) throw Error(ErrorCode::InvalidConfig, "mc_samples must be at least 1000");
  if (slice_cells < 2) throw Error(ErrorCode::InvalidConfig, "slice_cells must be at least 2");
  oss.validate();
}

std::size_t AnalysisConfig::effective_cluster_max() const {
  if (cluster_max) return *cluster_max;
  return oss.dimension() <= 3 ? 100000 : 1000;
}

AnalysisConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  static const std::set<std::string> known = {"inputs",     "labels",       "columns",       "collision_rule",
                                              "oss",        "beta",         "alpha",         "reach_mode",
                                              "match_radius", "max_exact_dim", "cluster_max", "mc_samples",
                                              "seed",       "out",          "slice_cells"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
  AnalysisConfig c;
  for (const auto& p : string_list(j, "inputs")) c.inputs.push_back(resolve(base_dir, p));
  for (const auto& p : string_list(j, "labels")) c.labels.push_back(resolve(base_dir, p));
  if (j.contains("columns")) {
    if (!j["columns"].is_object()) throw Error(ErrorCode::InvalidConfig, "'columns' must map names to headers");
    for (const auto& [k, v] : j["columns"].items()) {
      if (!v.is_string()) throw Error(ErrorCode::InvalidConfig, "column header for '" + k + "' must be a string");
      c.schema.add_mapping(k + "=" + v.get<std::string>());
    }
  }
  if (j.contains("collision_rule")) {
    c.collision_rule = ingest::collision_rule_from_string(get<std::string>(j, "collision_rule", "a string"));
  }
  if (j.contains("oss")) c.oss = parse_oss(j["oss"]);
  if (j.contains("beta")) c.beta = get<double>(j, "beta", "a number");
  if (j.contains("alpha")) {
    const json& a = j["alpha"];
    if (!a.is_object()) throw Error(ErrorCode::InvalidConfig, "'alpha' must be an object");
    if (a.contains("lo")) c.alpha_lo = get<double>(a, "lo", "a number");
    if (a.contains("hi")) c.alpha_hi = get<double>(a, "hi", "a number");
    if (a.contains("threshold")) c.alpha_threshold = get<double>(a, "threshold", "a number");
  }
  if (j.contains("reach_mode")) {
    try {
      c.reach_mode = safe::reach_mode_from_string(get<std::string>(j, "reach_mode", "a string"));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, e.what());
    }
  }
  if (j.contains("match_radius")) c.match_radius = get<double>(j, "match_radius", "a number");
  if (j.contains("max_exact_dim")) c.max_exact_dim = get<int>(j, "max_exact_dim", "an integer");
  if (j.contains("cluster_max") && !j["cluster_max"].is_null()) {
    c.cluster_max = get<std::size_t>(j, "cluster_max", "a positive integer");
  }
  if (j.contains("mc_samples")) c.mc_samples = get<std::uint64_t>(j, "mc_samples", "a positive integer");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", "a non-negative integer");
  if (j.contains("out")) c.out_dir = resolve(base_dir, get<std::string>(j, "out", "a path"));
  if (j.contains("slice_cells")) c.slice_cells = get<int>(j, "slice_cells", "an integer");
  c.validate();
  return c;
}

AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::path(path).parent_path().string());
}

std::string config_to_json(const AnalysisConfig& c) {
  json cols = json::object();
  for (const auto& [k, v] : c.schema.columns) cols[k] = v;
  json j{{"inputs", c.inputs},
         {"labels", c.labels},
         {"columns", cols},
         {"collision_rule", ingest::to_string(c.collision_rule)},
         {"oss", oss_json(c.oss)},
         {"beta", c.beta},
         {"alpha", {{"lo", c.alpha_lo}, {"hi", c.alpha_hi}, {"threshold", c.alpha_threshold}}},
         {"reach_mode", safe::to_string(c.reach_mode)},
         {"match_radius", c.match_radius},
         {"max_exact_dim", c.max_exact_dim},
         {"cluster_max", c.effective_cluster_max()},
         {"mc_samples", c.mc_samples},
         {"seed", c.seed},
         {"out", c.out_dir},
         {"slice_cells", c.slice_cells}};
  return j.dump(2);
}

std::vector<double> normalize(const oss::OssSpec& spec, const std::vector<double>& x) {
  const auto box = spec.bounds();
  std::vector<double> u(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) u[k] = (x[k] - box[k].lo) / box[k].length();
  return u;
}

std::vector<double> denormalize(const oss::OssSpec& spec, const std::vector<double>& u) {
  const auto box = spec.bounds();
  std::vector<double> x(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) x[k] = box[k].lo + u[k] * box[k].length();
  return x;
}

ingest::Dataset load_inputs(const AnalysisConfig& cfg) {
  if (cfg.inputs.empty()) throw Error(ErrorCode::InvalidConfig, "no input files configured");
  ingest::Dataset all;
  std::vector<double> dts;
  for (const auto& path : cfg.inputs) {
    if (!fs::exists(path)) throw Error(ErrorCode::IoError, "input '" + path + "' does not exist");
    ingest::Dataset d = ingest::parse_trajectory_csv(path, cfg.schema);
    dts.push_back(d.dt);
    all.samples.insert(all.samples.end(), d.samples.begin(), d.samples.end());
    all.warnings.insert(all.warnings.end(), d.warnings.begin(), d.warnings.end());
  }
  all.dt = dts.front();
  for (double dt : dts) {
    if (std::fabs(dt - all.dt) > 1e-6 * all.dt) all.warnings.push_back("inputs disagree on the sampling period");
  }
  std::vector<ingest::CollisionEvent> labels;
  for (const auto& path : cfg.labels) {
    if (!fs::exists(path)) throw Error(ErrorCode::IoError, "label file '" + path + "' does not exist");
    const auto l = ingest::load_collision_labels(path);
    labels.insert(labels.end(), l.begin(), l.end());
  }
  all = ingest::with_labels(std::move(all), labels);
  return all;
}

AnalysisReport analyze_dataset(const ingest::Dataset& raw, const AnalysisConfig& cfg) {
  cfg.validate();
  AnalysisReport r;
  r.config = cfg;
  const oss::OssSpec& spec = cfg.oss;
  const int n = spec.dimension();

  const ingest::Dataset data = ingest::label_collisions(raw, cfg.collision_rule);
  r.warnings = data.warnings;
  {
    std::set<std::string> recs, trajs;
    for (const auto& s : data.samples) {
      recs.insert(s.recording_id);
      trajs.insert(s.trajectory_id);
    }
    r.dataset.recordings = static_cast<std::int64_t>(recs.size());
    r.dataset.trajectories = static_cast<std::int64_t>(trajs.size());
  }
  r.dataset.collision_events = static_cast<std::int64_t>(data.collision_events.size());
  r.dataset.dt = data.dt;

  const auto ts = oss::extract(data, spec);
  r.dataset.state_trajectories = static_cast<std::int64_t>(ts.size());
  r.dataset.unsafe_trajectories = static_cast<std::int64_t>(safe::classify_trajectories(ts).unsafe.size());

  std::unordered_set<std::vector<double>, safe::VectorHash> all_states;
  std::vector<std::vector<double>> d_order;
  for (const auto& t : ts) {
    for (const auto& s : t.states) {
      std::vector<double> v = s.values;
      for (double& x : v) x = x == 0.0 ? 0.0 : x;
      if (all_states.insert(v).second) d_order.push_back(std::move(v));
    }
  }
  r.dataset.states = static_cast<std::int64_t>(all_states.size());

  safe::SafeStates ss = safe::extract_safe_states(ts, cfg.reach_mode, cfg.match_radius);
  r.ds = ss.states;
  r.removed = static_cast<std::int64_t>(ss.removed);
  std::unordered_set<std::vector<double>, safe::VectorHash> ds_set(r.ds.begin(), r.ds.end());
  for (const auto& v : d_order) {
    if (!ds_set.count(v)) r.excluded.push_back(v);
  }

  const oss::TransitionSet td = oss::transitions(ts);
  const safe::TransitionPartition part = safe::partition_transitions(td, r.ds);
  r.dataset.transitions = static_cast<std::int64_t>(td.size());
  const auto s_count = static_cast<std::int64_t>(part.safe.size());
  const auto c_count = static_cast<std::int64_t>(part.rest.size());

  // Shape in normalized coordinates.
  std::vector<geometry::Point> ds_norm;
  ds_norm.reserve(r.ds.size());
  for (const auto& v : r.ds) ds_norm.push_back(normalize(spec, v));
  double shape_measure = 0.0;
  if (!ds_norm.empty()) {
    geometry::ShapeOptions so;
    so.alpha_lo = cfg.alpha_lo;
    so.alpha_hi = cfg.alpha_hi;
    so.alpha_threshold = cfg.alpha_threshold;
    so.max_exact_dim = cfg.max_exact_dim;
    so.cluster_max = cfg.effective_cluster_max();
    so.mc_samples = cfg.mc_samples;
    so.seed = cfg.seed;
    r.shape = geometry::build_shape(ds_norm, so);
    r.empty_shape = false;
    shape_measure = r.shape.measure;
    for (const auto& w : r.shape.warnings) r.warnings.push_back(w);
    for (const auto& p : ds_norm) r.ds_contained += r.shape.contains(p) ? 1 : 0;

    std::vector<geometry::Point> excluded_norm;
    for (const auto& v : r.excluded) excluded_norm.push_back(normalize(spec, v));
    r.exclusion.excluded_points = static_cast<std::int64_t>(excluded_norm.size());
    r.exclusion.violations = static_cast<std::int64_t>(geometry::exclusion_violations(r.shape, excluded_norm).size());
    r.exclusion.passed = r.exclusion.violations == 0;
  } else {
    r.shape.dimension = n;
    r.exclusion.excluded_points = static_cast<std::int64_t>(r.excluded.size());
    r.warnings.push_back("D_s is empty; no shape was built");
  }

  auto& e = r.epsilon;
  e.beta = cfg.beta;
  e.s_count = s_count;
  e.c_count = c_count;
  if (td.size() > 0) {
    e.n_trailing = metrics::count_trailing_safe(
        td, [&](const std::vector<double>& v) {
          std::vector<double> w = v;
          for (double& x : w) x = x == 0.0 ? 0.0 : x;
          return ds_set.count(w) > 0;
        });
    e.epsilon_single = metrics::epsilon_from_count(e.n_trailing, cfg.beta);
    e.epsilon_bar_paper = metrics::algorithm3_epsilon_bar(s_count, s_count + c_count, cfg.beta);
    e.epsilon_bar_exact = metrics::epsilon_bar_exact(s_count, c_count, cfg.beta);
  } else {
    r.warnings.push_back("no transitions; epsilon is 1 by convention");
  }

  r.coverage = metrics::coverage(static_cast<std::int64_t>(r.ds.size()), shape_measure, 1.0);

  if (spec.kind == oss::OssKind::LeadFollowing) {
    r.baseline = metrics::ttc_stats(ts);
  } else {
    r.baseline.ttc_total = 0;
  }
  const bool collisions = !data.collision_events.empty() || r.dataset.unsafe_trajectories > 0;
  if (!collisions) {
    const double km = metrics::travelled_km(ts);
    if (km > 0.0) {
      r.baseline.safe_distance_km = km;
      r.baseline.fatality_bound = metrics::fatality_rate_bound(km, cfg.beta);
    }
  }

  r.warnings.push_back(
      "epsilon bounds assume the motion dynamics form a Markov decision process; no correction for non-Markovian "
      "behaviour is applied");
  r.warnings.push_back("coverage and epsilon assume the collected states are i.i.d. samples of the operating domain");
  r.warnings.push_back(
      "alpha and all measures are in normalized units: each OSS dimension is mapped affinely onto [0,1]");
  return r;
}

AnalysisReport run_analysis(const ingest::Dataset& data, const AnalysisConfig& cfg) {
  AnalysisReport r = analyze_dataset(data, cfg);
  if (!r.exclusion.passed) {
    throw Error(ErrorCode::ExclusionViolated,
                std::to_string(r.exclusion.violations) + " of " + std::to_string(r.exclusion.excluded_points) +
                    " states outside D_s fall inside the wrapped safe set; explore a different alpha range "
                    "(smaller --alpha-hi or --alpha-threshold) or a finer clustering");
  }
  return r;
}

AnalysisReport run_analysis(const AnalysisConfig& cfg) {
  cfg.validate();
  return run_analysis(load_inputs(cfg), cfg);
}

}  // namespace safeset::pipeline
