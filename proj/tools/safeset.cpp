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
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "safeset/error.hpp"
#include "safeset/ingest.hpp"
#include "safeset/oss.hpp"
#include "safeset/pipeline.hpp"
#include "safeset/simgen.hpp"

namespace fs = std::filesystem;
using namespace safeset;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitExclusion = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string labels_path_for(const std::string& data_path) {
  fs::path p(data_path);
  return (p.parent_path() / (p.stem().string() + ".labels.csv")).string();
}

ingest::Dataset load(const std::vector<std::string>& inputs, const std::vector<std::string>& labels,
                     const std::vector<std::string>& cols) {
  pipeline::AnalysisConfig cfg;
  cfg.inputs = inputs;
  cfg.labels = labels;
  for (const auto& c : cols) cfg.schema.add_mapping(c);
  return pipeline::load_inputs(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"safeset: data-driven safe-set quantification for automated driving"};
  app.require_subcommand(1);

  std::vector<std::string> inputs, labels, cols;
  std::string out, rule = "either", oss_name, config_path, policy = "idm0", battery = "ncap48", report_in;

  auto* ingest_cmd = app.add_subcommand("ingest", "parse, validate and label a trajectory CSV");
  ingest_cmd->add_option("-i,--input", inputs, "trajectory CSV")->required();
  ingest_cmd->add_option("-l,--labels", labels, "collision label CSV (trajectory_id,frame)");
  ingest_cmd->add_option("--col", cols, "column mapping name=header");
  ingest_cmd->add_option("--collision-rule", rule, "labels_only | geometric_overlap | either");
  ingest_cmd->add_option("-o,--out", out, "canonical CSV output")->required();

  auto* extract_cmd = app.add_subcommand("extract", "extract OSS states");
  extract_cmd->add_option("-i,--input", inputs, "trajectory CSV")->required();
  extract_cmd->add_option("-l,--labels", labels, "collision label CSV");
  extract_cmd->add_option("--col", cols, "column mapping name=header");
  extract_cmd->add_option("--collision-rule", rule, "collision rule");
  extract_cmd->add_option("--oss", oss_name, "OSS preset")->required();
  extract_cmd->add_option("-o,--out", out, "state CSV output")->required();

  auto* analyze_cmd = app.add_subcommand("analyze", "run the full analysis and write the report");
  analyze_cmd->add_option("-c,--config", config_path, "JSON config");
  analyze_cmd->add_option("-i,--input", inputs, "trajectory CSV (overrides config)");
  analyze_cmd->add_option("-l,--labels", labels, "collision label CSV (overrides config)");
  analyze_cmd->add_option("--col", cols, "column mapping name=header");
  analyze_cmd->add_option("--collision-rule", rule, "collision rule");
  analyze_cmd->add_option("--oss", oss_name, "OSS preset");
  std::optional<double> beta, alpha_lo, alpha_hi, alpha_threshold, match_radius;
  std::optional<int> max_exact_dim;
  std::optional<std::size_t> cluster_max;
  std::optional<std::uint64_t> mc_samples, seed;
  std::string reach_mode;
  analyze_cmd->add_option("--beta", beta, "confidence parameter beta");
  analyze_cmd->add_option("--alpha-lo", alpha_lo, "alpha search lower bound");
  analyze_cmd->add_option("--alpha-hi", alpha_hi, "alpha search upper bound");
  analyze_cmd->add_option("--alpha-threshold", alpha_threshold, "alpha search termination width");
  analyze_cmd->add_option("--reach-mode", reach_mode, "undirected | ancestors | descendants");
  analyze_cmd->add_option("--match-radius", match_radius, "seed matching radius");
  analyze_cmd->add_option("--max-exact-dim", max_exact_dim, "largest dimension for exact Delaunay");
  analyze_cmd->add_option("--cluster-max", cluster_max, "largest cluster size");
  analyze_cmd->add_option("--mc-samples", mc_samples, "Monte-Carlo samples");
  analyze_cmd->add_option("--seed", seed, "random seed");
  analyze_cmd->add_option("-o,--out", out, "output directory");

  std::uint64_t sim_seed = 1;
  auto* simulate_cmd = app.add_subcommand("simulate", "generate an IDM car-following battery");
  simulate_cmd->add_option("--policy", policy, "idm0 | idm1 | path to IDM JSON");
  simulate_cmd->add_option("--battery", battery, "scenario battery")->check(CLI::IsMember({"ncap48"}));
  simulate_cmd->add_option("--seed", sim_seed, "grid seed");
  simulate_cmd->add_option("-o,--out", out, "trajectory CSV output")->required();

  auto* report_cmd = app.add_subcommand("report", "summarize a report.json");
  report_cmd->add_option("report", report_in, "report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (ingest_cmd->parsed()) {
      ingest::Dataset d = load(inputs, labels, cols);
      d = ingest::label_collisions(d, ingest::collision_rule_from_string(rule));
      ingest::write_dataset_csv(d, out);
      ingest::write_collision_labels(d.collision_events, labels_path_for(out));
      std::cout << d.samples.size() << " samples, dt " << d.dt << " s, " << d.collision_events.size()
                << " collision events\n";
      for (const auto& w : d.warnings) std::cerr << "warning: " << w << '\n';
    } else if (extract_cmd->parsed()) {
      ingest::Dataset d = load(inputs, labels, cols);
      d = ingest::label_collisions(d, ingest::collision_rule_from_string(rule));
      const auto spec = oss::preset(oss_name);
      const auto ts = oss::extract(d, spec);
      oss::write_states_csv(ts, spec, out);
      std::size_t states = 0;
      for (const auto& t : ts) states += t.states.size();
      std::cout << ts.size() << " state trajectories, " << states << " states\n";
    } else if (analyze_cmd->parsed()) {
      pipeline::AnalysisConfig cfg = config_path.empty() ? pipeline::AnalysisConfig{} : pipeline::load_config(config_path);
      if (!inputs.empty()) cfg.inputs = inputs;
      if (!labels.empty()) cfg.labels = labels;
      for (const auto& c : cols) cfg.schema.add_mapping(c);
      if (analyze_cmd->count("--collision-rule")) cfg.collision_rule = ingest::collision_rule_from_string(rule);
      if (!oss_name.empty()) cfg.oss = oss::preset(oss_name);
      if (beta) cfg.beta = *beta;
      if (alpha_lo) cfg.alpha_lo = *alpha_lo;
      if (alpha_hi) cfg.alpha_hi = *alpha_hi;
      if (alpha_threshold) cfg.alpha_threshold = *alpha_threshold;
      if (!reach_mode.empty()) cfg.reach_mode = safe::reach_mode_from_string(reach_mode);
      if (match_radius) cfg.match_radius = *match_radius;
      if (max_exact_dim) cfg.max_exact_dim = *max_exact_dim;
      if (cluster_max) cfg.cluster_max = *cluster_max;
      if (mc_samples) cfg.mc_samples = *mc_samples;
      if (seed) cfg.seed = *seed;
      if (!out.empty()) cfg.out_dir = out;
      cfg.validate();
      const auto report = pipeline::analyze_dataset(pipeline::load_inputs(cfg), cfg);
      pipeline::emit_report(report, cfg.out_dir);
      std::cout << pipeline::summarize_report_json(pipeline::report_json(report));
      if (!report.exclusion.passed) {
        std::cerr << "error: ExclusionViolated: " << report.exclusion.violations << " of "
                  << report.exclusion.excluded_points
                  << " states outside D_s fall inside the wrapped safe set; explore a different alpha range\n";
        return kExitExclusion;
      }
    } else if (simulate_cmd->parsed()) {
      const sim::IdmParams p =
          fs::exists(policy) ? sim::policy_from_json(read_file(policy)) : sim::policy_preset(policy);
      const ingest::Dataset d = sim::ncap_battery(p, sim_seed);
      ingest::write_dataset_csv(d, out);
      const std::string lp = labels_path_for(out);
      ingest::write_collision_labels(d.collision_events, lp);
      std::cout << "48 scenarios, " << d.samples.size() << " samples, " << d.collision_events.size()
                << " collisions; labels in " << lp << '\n';
    } else if (report_cmd->parsed()) {
      std::cout << pipeline::summarize_report_json(read_file(report_in));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::ExclusionViolated) return kExitExclusion;
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
