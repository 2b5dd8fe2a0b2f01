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
#include <functional>
#include <memory>
#include <vector>

#include "safeset/geometry/delaunay.hpp"

namespace safeset::geometry {

class SimplexIndex;

/// Sub-complex of a Delaunay complex with filtration value <= alpha.
struct AlphaShape {
  double alpha = 0.0;
  std::shared_ptr<const SimplicialComplex> complex;
  /// included[k]: indices into complex->simplices[k].
  std::vector<std::vector<int>> included;
  double measure = 0.0;
  int component_count = 0;
  /// Every vertex lies in some included top simplex.
  bool covers_all_points = false;
  double tolerance = 1e-9;

  int dimension() const { return complex ? complex->dimension : 0; }
  /// Boundary counts as inside. Throws DimensionMismatch.
  bool contains(const std::vector<double>& p) const;
  bool contains(const double* p) const;

  std::shared_ptr<const SimplexIndex> index;
};

/// Filters `c` at `alpha`; builds the point-location index when
/// `with_index` is set (needed by contains()).
AlphaShape alpha_complex(std::shared_ptr<const SimplicialComplex> c, double alpha, bool with_index = true);

struct AlphaProbe {
  double alpha = 0.0;
  bool feasible = false;
  int components = 0;
};

struct AlphaSearchResult {
  double alpha_star = 0.0;
  AlphaShape shape;
  std::vector<AlphaProbe> probes;
  /// Pairs of probes where a smaller alpha was feasible and a larger one was
  /// not. Always 0 for a proper filtration.
  int monotonicity_violations = 0;
};

struct AlphaSearchOptions {
  double lo = 0.01;
  double hi = 100.0;
  double threshold = 0.1;
  DelaunayOptions delaunay;
  /// Feasibility predicate; defaults to a single component covering every
  /// point.
  std::function<bool(const AlphaShape&)> predicate;
};

/// Single connected polytope covering all points.
bool single_polytope(const AlphaShape& s);

/// Log-space bisection for the smallest feasible alpha. Stops once
/// hi - lo <= threshold and returns the feasible end. Throws InfeasibleAtHi.
AlphaSearchResult search_optimal_alpha(const std::vector<Point>& points, const AlphaSearchOptions& options = {});
AlphaSearchResult search_optimal_alpha(std::shared_ptr<const SimplicialComplex> c,
                                       const AlphaSearchOptions& options = {});

/// True when no excluded point is contained in the shape.
bool check_exclusion(const AlphaShape& shape, const std::vector<Point>& excluded);

}  // namespace safeset::geometry
