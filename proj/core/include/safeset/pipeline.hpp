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
#include <optional>
#include <string>
#include <vector>

#include "safeset/geometry/shape_union.hpp"
#include "safeset/ingest.hpp"
#include "safeset/metrics.hpp"
#include "safeset/oss.hpp"
#include "safeset/safe_set.hpp"

namespace safeset::pipeline {

inline constexpr const char* kSchemaVersion = "1.0.0";

struct AnalysisConfig {
  std::vector<std::string> inputs;  // trajectory CSVs
  std::vector<std::string> labels;  // collision label sidecars
  ingest::SchemaOptions schema;
  ingest::CollisionRule collision_rule = ingest::CollisionRule::Either;
  oss::OssSpec oss = oss::preset("highd-lead");
  double beta = 0.001;
  double alpha_lo = 0.01;
  double alpha_hi = 100.0;
  double alpha_threshold = 0.1;
  safe::ReachMode reach_mode = safe::ReachMode::Undirected;
  double match_radius = 0.0;
  int max_exact_dim = 6;
  std::optional<std::size_t> cluster_max;  // default depends on dimension
  std::uint64_t mc_samples = 100000;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int slice_cells = 100;

  /// Parameter checks only; file existence is checked by run_analysis.
  void validate() const;
  std::size_t effective_cluster_max() const;
};

/// Relative paths resolve against `base_dir`. Throws InvalidConfig.
AnalysisConfig parse_config(const std::string& json_text, const std::string& base_dir = "");
AnalysisConfig load_config(const std::string& path);
std::string config_to_json(const AnalysisConfig& cfg);

struct DatasetSummary {
  std::int64_t recordings = 0;
  std::int64_t trajectories = 0;         // source trajectory ids
  std::int64_t state_trajectories = 0;   // after OSS extraction
  std::int64_t unsafe_trajectories = 0;
  std::int64_t collision_events = 0;
  std::int64_t states = 0;               // |D|, distinct state vectors
  std::int64_t transitions = 0;          // |TD|
  double dt = 0.0;
};

struct ExclusionResult {
  bool passed = true;
  std::int64_t excluded_points = 0;
  std::int64_t violations = 0;
};

struct AnalysisReport {
  AnalysisConfig config;
  DatasetSummary dataset;
  std::vector<std::vector<double>> ds;        // D_s, physical units
  std::vector<std::vector<double>> excluded;  // D \ D_s, physical units
  std::int64_t removed = 0;
  bool empty_shape = true;
  geometry::ShapeUnion shape;  // in normalized coordinates
  std::int64_t ds_contained = 0;
  ExclusionResult exclusion;
  metrics::EpsilonResult epsilon;
  metrics::CoverageResult coverage;
  metrics::BaselineResult baseline;
  std::vector<std::string> warnings;
};

/// Physical OSS coordinates to the unit box and back.
std::vector<double> normalize(const oss::OssSpec& spec, const std::vector<double>& x);
std::vector<double> denormalize(const oss::OssSpec& spec, const std::vector<double>& u);

/// Reads and labels the configured inputs.
ingest::Dataset load_inputs(const AnalysisConfig& cfg);

/// Full analysis; throws ExclusionViolated when the wrapped safe set
/// contains a state outside D_s.
AnalysisReport run_analysis(const AnalysisConfig& cfg);
AnalysisReport run_analysis(const ingest::Dataset& data, const AnalysisConfig& cfg);

/// Same as run_analysis but returns the report even when the exclusion
/// check fails (report.exclusion.passed is then false).
AnalysisReport analyze_dataset(const ingest::Dataset& data, const AnalysisConfig& cfg);

std::string report_json(const AnalysisReport& r);
std::string shape_json(const AnalysisReport& r);
std::string ds_csv(const AnalysisReport& r);

struct Slice {
  std::string file_name;
  std::string csv;
};
std::vector<Slice> slices(const AnalysisReport& r);

/// Writes report.json, shape.json, ds.csv and the slice files into `dir`
/// (created when missing). Returns the written paths. Throws IoError.
std::vector<std::string> emit_report(const AnalysisReport& r, const std::string& dir);

/// Short human-readable summary of a report.json document.
std::string summarize_report_json(const std::string& json_text);

}  // namespace safeset::pipeline
