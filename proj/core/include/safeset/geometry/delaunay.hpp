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

#include <array>
#include <cstdint>
#include <vector>

namespace safeset::geometry {

using Point = std::vector<double>;

struct Simplex {
  std::vector<int> vertices;  // sorted indices into SimplicialComplex::points
  double radius = 0.0;        // filtration value
};

/// Delaunay complex with alpha-complex filtration values.
///
/// simplices[k] holds the k-simplices. Top simplices (k = n) carry their
/// circumradius; a lower face carries the radius of its smallest
/// circumscribing sphere when that sphere is empty of the vertices of its
/// cofaces, otherwise the smallest filtration value among its cofacets.
/// Vertices carry 0.
struct SimplicialComplex {
  int dimension = 0;
  std::vector<Point> points;
  std::vector<std::vector<Simplex>> simplices;
  /// top_adjacency[t][i]: top simplex sharing the facet opposite
  /// simplices[n][t].vertices[i], or -1 on the hull boundary.
  std::vector<std::vector<int>> top_adjacency;
  std::vector<double> top_volume;
  /// Groups of top simplices joined through a connected set of dropped
  /// zero-volume simplices; they touch as if they shared a facet.
  std::vector<std::vector<int>> top_bridges;
  /// Points that did not become vertices (coincident with another point
  /// within tolerance).
  std::vector<int> skipped;
  double scale = 1.0;  // diameter of the bounding box of `points`

  const std::vector<Simplex>& top() const { return simplices[static_cast<std::size_t>(dimension)]; }
};

struct DelaunayOptions {
  int max_dimension = 6;
  /// Relative (to the bounding-box diameter) distance below which two points
  /// are treated as one.
  double tolerance = 1e-9;
  /// Build every face with its filtration value; when false only vertices and
  /// top simplices are stored.
  bool build_faces = true;
  std::uint64_t seed = 0x5eed5a7e;
};

/// Delaunay triangulation of points in R^n via the lower convex hull of the
/// points lifted onto the paraboloid, computed incrementally. Ties from
/// cospherical or coplanar input are broken by a deterministic perturbation
/// far below `tolerance`; volumes and radii use the unperturbed coordinates.
///
/// Throws DimensionTooHigh when n > max_dimension and DegenerateInput when
/// fewer than n+1 affinely independent points exist.
SimplicialComplex delaunay(const std::vector<Point>& points, const DelaunayOptions& options = {});

// Small dense helpers shared with the alpha-shape code.

/// |det| / n! of the simplex spanned by n+1 points in R^n.
double simplex_volume(const std::vector<const double*>& vertices, int n);

/// Center and radius of the smallest sphere through the given k+1 points of
/// R^n (k <= n). Returns false for affinely dependent input.
bool circumsphere(const std::vector<const double*>& vertices, int n, std::vector<double>& center, double& radius);

}  // namespace safeset::geometry
