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

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "safeset/geometry/alpha_shape.hpp"
#include "safeset/geometry/hull_membership.hpp"
#include "safeset/geometry/mc_volume.hpp"

namespace safeset::geometry {

enum class MemberKind { Points, Alpha, Hull };
std::string to_string(MemberKind kind);

/// One cluster's shape, built in the cluster's own affine frame so that
/// flat clusters (intrinsic dimension k < n) still get a k-dimensional
/// alpha shape. Points are mapped as local = basis^T (p - origin).
struct EmbeddedShape {
  MemberKind kind = MemberKind::Points;
  int ambient_dimension = 0;
  int intrinsic_dimension = 0;
  Eigen::VectorXd origin;
  Eigen::MatrixXd basis;  // ambient x intrinsic, orthonormal columns
  double residual_tolerance = 1e-9;
  std::vector<Point> points;  // ambient
  std::vector<Point> local_points;
  AlphaShape alpha;  // kind == Alpha
  double alpha_star = 0.0;
  bool single_polytope = false;
  HullMembership hull;  // kind == Hull
  Box box;              // ambient bounding box, padded
  double measure = 0.0;  // ambient n-volume
  double measure_half_width = 0.0;
  std::size_t point_count = 0;

  bool contains(const double* p) const;
  Point to_local(const double* p, double* residual = nullptr) const;
  Point to_ambient(const Point& local) const;
};

struct ShapeOptions {
  double alpha_lo = 0.01;
  double alpha_hi = 100.0;
  double alpha_threshold = 0.1;
  int max_exact_dim = 6;
  std::size_t cluster_max = 100000;
  std::uint64_t mc_samples = 100000;
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
};

struct ShapeUnion {
  int dimension = 0;
  std::vector<EmbeddedShape> members;
  std::string provenance;  // cluster tree, e.g. "(412,(380,208))"
  double measure = 0.0;
  double measure_half_width = 0.0;
  double overlap = 0.0;  // estimated pairwise overlap already subtracted
  bool exact_measure = true;
  std::vector<std::string> warnings;

  bool contains(const double* p) const;
  bool contains(const std::vector<double>& p) const;
};

/// Clusters when needed, then wraps each cluster in its optimal alpha shape
/// (or, above max_exact_dim, its convex hull).
ShapeUnion build_shape(const std::vector<Point>& points, const ShapeOptions& options);

EmbeddedShape build_member(const std::vector<Point>& points, const ShapeOptions& options, std::uint64_t seed);

bool check_exclusion(const ShapeUnion& shape, const std::vector<Point>& excluded);
/// Indices of excluded points that the shape contains.
std::vector<std::size_t> exclusion_violations(const ShapeUnion& shape, const std::vector<Point>& excluded);

}  // namespace safeset::geometry
