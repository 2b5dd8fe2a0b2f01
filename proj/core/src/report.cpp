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
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "safeset/csv.hpp"
#include "safeset/error.hpp"
#include "safeset/parallel.hpp"
#include "safeset/pipeline.hpp"

namespace safeset::pipeline {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

template <typename T>
ojson optional(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

ojson member_json(const geometry::EmbeddedShape& m) {
  ojson j;
  j["kind"] = geometry::to_string(m.kind);
  j["points"] = m.point_count;
  j["intrinsic_dimension"] = m.intrinsic_dimension;
  j["alpha_star"] = m.kind == geometry::MemberKind::Alpha ? ojson(m.alpha_star) : ojson(nullptr);
  j["single_polytope"] = m.single_polytope;
  j["components"] = m.kind == geometry::MemberKind::Alpha ? m.alpha.component_count : 1;
  j["measure"] = m.measure;
  j["measure_half_width"] = m.measure_half_width;
  return j;
}

std::optional<double> max_alpha(const geometry::ShapeUnion& u) {
  std::optional<double> a;
  for (const auto& m : u.members) {
    if (m.kind == geometry::MemberKind::Alpha) a = std::max(a.value_or(0.0), m.alpha_star);
  }
  return a;
}

struct SlicePlan {
  int a, b;  // axis dimensions
  double lo, hi;  // v0 band
};

std::vector<SlicePlan> plan_slices(const AnalysisReport& r) {
  const auto& spec = r.config.oss;
  const auto box = spec.bounds();
  std::vector<std::pair<int, int>> axes;
  switch (spec.kind) {
    case oss::OssKind::LeadFollowing: axes = {{1, 2}}; break;
    case oss::OssKind::MultiVehicle:
      for (int i = 0; i < 6; ++i) axes.emplace_back(1 + 2 * i, 2 + 2 * i);
      break;
    case oss::OssKind::VehiclePedestrian: axes = {{1, 2}, {3, 4}}; break;
    case oss::OssKind::Combined:
      for (int i = 0; i < 6; ++i) axes.emplace_back(1 + 2 * i, 2 + 2 * i);
      axes.emplace_back(13, 14);
      axes.emplace_back(15, 16);
      break;
  }
  std::vector<std::pair<double, double>> bands;
  if (spec.kind == oss::OssKind::LeadFollowing) {
    const int count = 5;
    const double w = box[0].length() / count;
    for (int i = 0; i < count; ++i) bands.emplace_back(box[0].lo + i * w, box[0].lo + (i + 1) * w);
  } else {
    std::vector<double> v0;
    for (const auto& p : r.ds) v0.push_back(p[0]);
    std::nth_element(v0.begin(), v0.begin() + static_cast<std::ptrdiff_t>(v0.size() / 2), v0.end());
    const double med = v0[v0.size() / 2];
    double lo = std::max(box[0].lo, std::floor(med));
    double hi = std::min(box[0].hi, lo + 1.0);
    if (hi - lo < 1.0) lo = std::max(box[0].lo, hi - 1.0);
    bands.emplace_back(lo, hi);
  }
  std::vector<SlicePlan> out;
  for (const auto& [lo, hi] : bands) {
    for (const auto& [a, b] : axes) out.push_back({a, b, lo, hi});
  }
  return out;
}

std::string band_text(double x) { return csv::format_double(std::round(x * 1000.0) / 1000.0); }

}  // namespace

std::string report_json(const AnalysisReport& r) {
  const auto& cfg = r.config;
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = ojson::parse(config_to_json(cfg));

  ojson o;
  o["kind"] = oss::to_string(cfg.oss.kind);
  o["name"] = cfg.oss.name;
  o["dimension"] = cfg.oss.dimension();
  ojson dims = ojson::array();
  const auto names = cfg.oss.dimension_names();
  const auto box = cfg.oss.bounds();
  for (std::size_t k = 0; k < names.size(); ++k) dims.push_back({{"name", names[k]}, {"lo", box[k].lo}, {"hi", box[k].hi}});
  o["dimensions"] = dims;
  o["volume"] = cfg.oss.volume();
  o["normalization"] = "per-dimension affine map of the OSS box onto [0,1]";
  j["oss"] = o;

  const auto& d = r.dataset;
  j["dataset"] = {{"recordings", d.recordings},
                  {"trajectories", d.trajectories},
                  {"state_trajectories", d.state_trajectories},
                  {"unsafe_trajectories", d.unsafe_trajectories},
                  {"collision_events", d.collision_events},
                  {"states", d.states},
                  {"transitions", d.transitions},
                  {"dt", d.dt}};
  j["safe_set"] = {{"cardinality", r.ds.size()},
                   {"removed_vertices", r.removed},
                   {"excluded_states", r.excluded.size()},
                   {"reach_mode", safe::to_string(cfg.reach_mode)},
                   {"match_radius", cfg.match_radius}};

  ojson s;
  s["empty"] = r.empty_shape;
  s["alpha_star"] = optional(max_alpha(r.shape));
  s["measure"] = r.shape.measure;
  s["measure_half_width"] = r.shape.measure_half_width;
  s["measure_exact"] = r.shape.exact_measure;
  s["overlap_subtracted"] = r.shape.overlap;
  s["clusters"] = r.shape.members.size();
  s["cluster_tree"] = r.shape.provenance;
  int components = 0;
  for (const auto& m : r.shape.members) components += m.kind == geometry::MemberKind::Alpha ? m.alpha.component_count : 1;
  s["components"] = components;
  s["ds_contained"] = r.ds_contained;
  ojson members = ojson::array();
  for (const auto& m : r.shape.members) members.push_back(member_json(m));
  s["members"] = members;
  s["exclusion_check"] = {{"passed", r.exclusion.passed},
                          {"excluded_points", r.exclusion.excluded_points},
                          {"violations", r.exclusion.violations}};
  j["shape"] = s;

  const auto& e = r.epsilon;
  j["epsilon"] = {{"beta", e.beta},
                  {"confidence", e.confidence()},
                  {"s", e.s_count},
                  {"c", e.c_count},
                  {"n_trailing", e.n_trailing},
                  {"epsilon_single", optional(e.epsilon_single)},
                  {"epsilon_bar_paper", e.epsilon_bar_paper},
                  {"epsilon_bar_exact", e.epsilon_bar_exact},
                  {"notes",
                   {{"epsilon_bar_paper", "positional weighting: sum of eps_i * i!(|TD|-i)!/|TD|!"},
                    {"epsilon_bar_exact", "expectation of the trailing-run bound over uniformly random replays"},
                    {"epsilon_single", "bound for the replay in recorded order"}}}};

  const auto& c = r.coverage;
  j["coverage"] = {{"density", optional(c.density)},
                   {"occupancy", c.occupancy},
                   {"ds_cardinality", c.ds_cardinality},
                   {"shape_measure", c.shape_measure},
                   {"space_measure", c.space_measure}};

  const auto& b = r.baseline;
  j["baselines"] = {{"ttc_mean", optional(b.ttc_mean)},
                    {"ttc_std", optional(b.ttc_std)},
                    {"ttc_valid_rate", b.ttc_valid_rate},
                    {"ttc_valid", b.ttc_valid},
                    {"ttc_total", b.ttc_total},
                    {"safe_distance_km", optional(b.safe_distance_km)},
                    {"fatality_bound", optional(b.fatality_bound)}};
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string shape_json(const AnalysisReport& r) {
  const auto& spec = r.config.oss;
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["empty"] = r.empty_shape;
  j["dimension"] = spec.dimension();
  ojson norm = ojson::array();
  const auto names = spec.dimension_names();
  const auto box = spec.bounds();
  for (std::size_t k = 0; k < names.size(); ++k) {
    norm.push_back({{"name", names[k]}, {"offset", box[k].lo}, {"scale", box[k].length()}});
  }
  j["normalization"] = norm;
  j["alpha"] = optional(max_alpha(r.shape));
  j["measure"] = r.shape.measure;
  ojson members = ojson::array();
  for (const auto& m : r.shape.members) {
    ojson mj = member_json(m);
    mj["points"] = m.points;
    if (m.kind == geometry::MemberKind::Alpha) {
      const auto& included = m.alpha.included;
      const auto& cx = *m.alpha.complex;
      ojson simplices = ojson::array();
      for (std::size_t k = 0; k < included.size(); ++k) {
        for (int idx : included[k]) {
          const auto& s = cx.simplices[k][static_cast<std::size_t>(idx)];
          if (k == 0) continue;
          simplices.push_back(s.vertices);
        }
      }
      mj["simplices"] = simplices;
      mj["frame"] = {{"origin", std::vector<double>(m.origin.data(), m.origin.data() + m.origin.size())}};
      ojson basis = ojson::array();
      for (Eigen::Index c = 0; c < m.basis.cols(); ++c) {
        std::vector<double> col(static_cast<std::size_t>(m.basis.rows()));
        for (Eigen::Index rr = 0; rr < m.basis.rows(); ++rr) col[static_cast<std::size_t>(rr)] = m.basis(rr, c);
        basis.push_back(col);
      }
      mj["frame"]["basis"] = basis;
    }
    members.push_back(mj);
  }
  j["members"] = members;
  return j.dump() + "\n";
}

std::string ds_csv(const AnalysisReport& r) {
  std::ostringstream out;
  const auto names = r.config.oss.dimension_names();
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  for (const auto& p : r.ds) {
    for (std::size_t k = 0; k < p.size(); ++k) out << (k ? "," : "") << csv::format_double(p[k]);
    out << '\n';
  }
  return out.str();
}

std::vector<Slice> slices(const AnalysisReport& r) {
  std::vector<Slice> out;
  if (r.empty_shape || r.ds.empty()) return out;
  const auto& spec = r.config.oss;
  const auto box = spec.bounds();
  const auto names = spec.dimension_names();
  const int cells = r.config.slice_cells;
  const bool cross_section = spec.kind == oss::OssKind::LeadFollowing;

  for (const auto& plan : plan_slices(r)) {
    const auto ua = static_cast<std::size_t>(plan.a);
    const auto ub = static_cast<std::size_t>(plan.b);
    std::vector<const std::vector<double>*> in_band;
    for (const auto& p : r.ds) {
      if (p[0] >= plan.lo && p[0] <= plan.hi) in_band.push_back(&p);
    }
    if (!cross_section && in_band.empty()) continue;
    const double wa = box[ua].length() / cells;
    const double wb = box[ub].length() / cells;
    auto cell_of = [&](double x, std::size_t dim, double w) {
      return std::clamp(static_cast<int>(std::floor((x - box[dim].lo) / w)), 0, cells - 1);
    };
    std::vector<int> ds_count(static_cast<std::size_t>(cells * cells), 0);
    for (const auto* p : in_band) {
      const int i = cell_of((*p)[ua], ua, wa);
      const int k = cell_of((*p)[ub], ub, wb);
      ++ds_count[static_cast<std::size_t>(i * cells + k)];
    }
    std::vector<char> member(ds_count.size(), 0);
    parallel_for(ds_count.size(), [&](std::size_t idx) {
      if (ds_count[idx] > 0) {
        member[idx] = 1;
        return;
      }
      const int i = static_cast<int>(idx) / cells;
      const int k = static_cast<int>(idx) % cells;
      const double ca = box[ua].lo + (i + 0.5) * wa;
      const double cb = box[ub].lo + (k + 0.5) * wb;
      std::vector<double> x(box.size());
      if (cross_section || in_band.empty()) {
        for (std::size_t dd = 0; dd < box.size(); ++dd) x[dd] = 0.5 * (box[dd].lo + box[dd].hi);
        x[0] = 0.5 * (plan.lo + plan.hi);
      } else {
        const std::vector<double>* best = nullptr;
        double best_d = INFINITY;
        for (const auto* p : in_band) {
          const double da = ((*p)[ua] - ca) / box[ua].length();
          const double db = ((*p)[ub] - cb) / box[ub].length();
          const double dist = da * da + db * db;
          if (dist < best_d) {
            best_d = dist;
            best = p;
          }
        }
        x = *best;
      }
      x[ua] = ca;
      x[ub] = cb;
      member[idx] = r.shape.contains(normalize(spec, x)) ? 1 : 0;
    });

    std::ostringstream csv_out;
    csv_out << names[ua] << ',' << names[ub] << ",member,ds_count\n";
    for (int i = 0; i < cells; ++i) {
      for (int k = 0; k < cells; ++k) {
        const auto idx = static_cast<std::size_t>(i * cells + k);
        csv_out << csv::format_double(box[ua].lo + (i + 0.5) * wa) << ','
                << csv::format_double(box[ub].lo + (k + 0.5) * wb) << ',' << static_cast<int>(member[idx]) << ','
                << ds_count[idx] << '\n';
      }
    }
    Slice s;
    s.file_name = "slice_" + names[ua] + "-" + names[ub] + "_" + names[0] + "_" + band_text(plan.lo) + "-" +
                  band_text(plan.hi) + ".csv";
    s.csv = csv_out.str();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> emit_report(const AnalysisReport& r, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    f << text;
    if (!f) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
    written.push_back(path);
  };
  write("report.json", report_json(r));
  write("shape.json", shape_json(r));
  write("ds.csv", ds_csv(r));
  for (const auto& s : slices(r)) write(s.file_name, s.csv);
  return written;
}

std::string summarize_report_json(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const ojson::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("not a report: ") + e.what());
  }
  auto num = [](const ojson& v) { return v.is_null() ? std::string("n/a") : v.dump(); };
  std::ostringstream os;
  os << "oss            " << j["oss"]["name"].get<std::string>() << " (" << j["oss"]["dimension"] << "-d)\n";
  os << "states |D|     " << j["dataset"]["states"] << "   transitions |TD| " << j["dataset"]["transitions"] << '\n';
  os << "safe set |D_s| " << j["safe_set"]["cardinality"] << "   s = " << j["epsilon"]["s"] << ", c = "
     << j["epsilon"]["c"] << '\n';
  os << "alpha*         " << num(j["shape"]["alpha_star"]) << "   clusters " << j["shape"]["clusters"]
     << "   exclusion " << (j["shape"]["exclusion_check"]["passed"].get<bool>() ? "passed" : "FAILED") << '\n';
  os << "eps_bar exact  " << num(j["epsilon"]["epsilon_bar_exact"]) << "   positional " << num(j["epsilon"]["epsilon_bar_paper"])
     << "   (beta " << num(j["epsilon"]["beta"]) << ")\n";
  os << "density        " << num(j["coverage"]["density"]) << "   occupancy " << num(j["coverage"]["occupancy"]) << '\n';
  os << "ttc mean/std   " << num(j["baselines"]["ttc_mean"]) << " / " << num(j["baselines"]["ttc_std"])
     << "   valid rate " << num(j["baselines"]["ttc_valid_rate"]) << '\n';
  os << "1-R(C)         " << num(j["baselines"]["fatality_bound"]) << '\n';
  return os.str();
}

}  // namespace safeset::pipeline
