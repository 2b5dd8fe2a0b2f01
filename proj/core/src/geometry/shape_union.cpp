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
#include "safeset/geometry/shape_union.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "safeset/error.hpp"
#include "safeset/geometry/clustering.hpp"
#include "safeset/parallel.hpp"

namespace safeset::geometry {

namespace {
// Product of singular-value ratios below which a cluster is too thin for a
// full-dimensional Delaunay complex (simplices get dropped as flat).
constexpr double kMinAspect = 1e-8;
}  // namespace

std::string to_string(MemberKind kind) {
  switch (kind) {
    case MemberKind::Points: return "points";
    case MemberKind::Alpha: return "alpha";
    case MemberKind::Hull: return "hull";
  }
  return "unknown";
}

Point EmbeddedShape::to_local(const double* p, double* residual) const {
  Eigen::VectorXd rel(ambient_dimension);
  for (int d = 0; d < ambient_dimension; ++d) rel[d] = p[d] - origin[d];
  const Eigen::VectorXd local = basis.transpose() * rel;
  if (residual) *residual = (rel - basis * local).norm();
  return Point(local.data(), local.data() + local.size());
}

Point EmbeddedShape::to_ambient(const Point& local) const {
  const Eigen::VectorXd l = Eigen::Map<const Eigen::VectorXd>(local.data(), static_cast<Eigen::Index>(local.size()));
  const Eigen::VectorXd a = origin + basis * l;
  return Point(a.data(), a.data() + a.size());
}

bool EmbeddedShape::contains(const double* p) const {
  if (!box.contains(p)) return false;
  double residual = 0.0;
  const Point local = to_local(p, &residual);
  if (residual > residual_tolerance) return false;
  switch (kind) {
    case MemberKind::Points:
      return std::any_of(local_points.begin(), local_points.end(), [&](const Point& q) {
        double d = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) d += (q[i] - local[i]) * (q[i] - local[i]);
        return std::sqrt(d) <= residual_tolerance;
      });
    case MemberKind::Alpha: return alpha.contains(local.data());
    case MemberKind::Hull: return hull.contains(local.data());
  }
  return false;
}

bool ShapeUnion::contains(const double* p) const {
  return std::any_of(members.begin(), members.end(), [&](const EmbeddedShape& m) { return m.contains(p); });
}

bool ShapeUnion::contains(const std::vector<double>& p) const {
  if (static_cast<int>(p.size()) != dimension) {
    throw Error(ErrorCode::DimensionMismatch, "point has dimension " + std::to_string(p.size()) + ", shape has " +
                                                  std::to_string(dimension));
  }
  return contains(p.data());
}

EmbeddedShape build_member(const std::vector<Point>& points, const ShapeOptions& options, std::uint64_t seed) {
  if (points.empty()) throw Error(ErrorCode::DegenerateInput, "empty cluster");
  EmbeddedShape m;
  const int n = static_cast<int>(points.front().size());
  const auto count = static_cast<Eigen::Index>(points.size());
  m.ambient_dimension = n;
  m.point_count = points.size();
  m.points = points;

  Eigen::MatrixXd x(count, n);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (int d = 0; d < n; ++d) x(i, d) = points[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
  }
  m.origin = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - m.origin.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int k = 0;
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-7 * smax && sv[i] > 1e-12) ++k;
  }
  if (k <= options.max_exact_dim) {
    // Axes whose cumulative aspect ratio drops below the Delaunay flatness
    // cut would only yield zero-volume simplices; treat them as thickness.
    double aspect = 1.0;
    for (int i = 1; i < k; ++i) {
      aspect *= sv[i] / smax;
      if (aspect < kMinAspect) {
        k = i;
        break;
      }
    }
  }
  m.intrinsic_dimension = k;
  m.basis = svd.matrixV().leftCols(k);
  const Eigen::MatrixXd local = centered * m.basis;
  const double resid = k > 0 ? (centered - local * m.basis.transpose()).rowwise().norm().maxCoeff()
                             : centered.rowwise().norm().maxCoeff();
  m.residual_tolerance = resid * (1.0 + 1e-9) + options.tolerance;
  m.local_points.resize(points.size());
  for (Eigen::Index i = 0; i < count; ++i) {
    m.local_points[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(k), 0.0);
    for (int d = 0; d < k; ++d) m.local_points[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] = local(i, d);
  }
  m.box.lo.assign(static_cast<std::size_t>(n), INFINITY);
  m.box.hi.assign(static_cast<std::size_t>(n), -INFINITY);
  for (const auto& p : points) {
    for (std::size_t d = 0; d < p.size(); ++d) {
      m.box.lo[d] = std::min(m.box.lo[d], p[d] - m.residual_tolerance);
      m.box.hi[d] = std::max(m.box.hi[d], p[d] + m.residual_tolerance);
    }
  }

  if (k == 0 || static_cast<int>(points.size()) < k + 1) {
    m.kind = MemberKind::Points;
    m.single_polytope = points.size() == 1 || k == 0;
    return m;
  }

  if (k <= options.max_exact_dim) {
    AlphaSearchOptions ao;
    ao.lo = options.alpha_lo;
    ao.hi = options.alpha_hi;
    ao.threshold = options.alpha_threshold;
    ao.delaunay.tolerance = options.tolerance;
    ao.delaunay.max_dimension = options.max_exact_dim;
    ao.delaunay.seed = seed;
    auto complex = std::make_shared<const SimplicialComplex>(delaunay(m.local_points, ao.delaunay));
    m.kind = MemberKind::Alpha;
    try {
      AlphaSearchResult r = search_optimal_alpha(complex, ao);
      m.alpha_star = r.alpha_star;
      m.alpha = std::move(r.shape);
      m.single_polytope = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasibleAtHi) throw;
      m.alpha_star = options.alpha_hi;
      m.alpha = alpha_complex(complex, options.alpha_hi, true);
      m.single_polytope = false;
    }
    m.measure = k == n ? m.alpha.measure : 0.0;
    return m;
  }

  m.kind = MemberKind::Hull;
  m.hull = HullMembership(m.local_points, options.tolerance);
  m.single_polytope = true;
  if (k == n) {
    const Box local_box{m.hull.lo(), m.hull.hi()};
    const HullMembership& h = m.hull;
    const VolumeEstimate v =
        mc_volume([&h](const double* q) { return h.contains(q); }, local_box, options.mc_samples, seed);
    m.measure = v.estimate;
    m.measure_half_width = v.half_width_95;
    // No hit at all: the normal interval collapses to zero width, so report
    // the rule-of-three 95% upper bound instead.
    if (v.hits == 0) m.measure_half_width = 3.0 * local_box.volume() / static_cast<double>(v.samples);
  }
  return m;
}

ShapeUnion build_shape(const std::vector<Point>& points, const ShapeOptions& options) {
  if (points.empty()) throw Error(ErrorCode::DegenerateInput, "no points to wrap");
  ShapeUnion u;
  u.dimension = static_cast<int>(points.front().size());
  const ClusterTree tree = cluster_tree(points, std::max<std::size_t>(options.cluster_max, 1), options.seed);
  u.provenance = tree.describe();

  std::vector<std::vector<Point>> groups;
  for (int leaf : tree.leaves) {
    std::vector<Point> g;
    for (int i : tree.nodes[static_cast<std::size_t>(leaf)].members) g.push_back(points[static_cast<std::size_t>(i)]);
    groups.push_back(std::move(g));
  }
  u.members.resize(groups.size());
  parallel_for(groups.size(), [&](std::size_t i) {
    u.members[i] = build_member(groups[i], options, mix_seed(options.seed + i));
  });

  double var = 0.0;
  for (std::size_t i = 0; i < u.members.size(); ++i) {
    const auto& m = u.members[i];
    u.measure += m.measure;
    var += m.measure_half_width * m.measure_half_width;
    if (m.kind == MemberKind::Hull && m.intrinsic_dimension == u.dimension) u.exact_measure = false;
    if (m.kind == MemberKind::Hull && m.intrinsic_dimension == u.dimension && m.measure == 0.0) {
      u.warnings.push_back("cluster " + std::to_string(i) +
                           ": no Monte-Carlo sample fell inside the hull; its measure is below the sampling "
                           "resolution and counted as 0");
    }
    if (!m.single_polytope) {
      u.warnings.push_back("cluster " + std::to_string(i) + " is not a single polytope at alpha = " +
                           std::to_string(options.alpha_hi));
    }
  }
  // Pairwise overlaps, estimated inside the intersection of bounding boxes.
  const std::uint64_t pair_samples = std::max<std::uint64_t>(1000, options.mc_samples / 10);
  for (std::size_t i = 0; i < u.members.size(); ++i) {
    for (std::size_t j = i + 1; j < u.members.size(); ++j) {
      const auto& a = u.members[i];
      const auto& b = u.members[j];
      if (a.measure <= 0.0 || b.measure <= 0.0 || !a.box.intersects(b.box)) continue;
      const Box meet = a.box.intersection(b.box);
      const VolumeEstimate v = mc_volume([&](const double* q) { return a.contains(q) && b.contains(q); }, meet,
                                         pair_samples, mix_seed(options.seed ^ (i * 7919 + j)));
      u.overlap += v.estimate;
      var += v.half_width_95 * v.half_width_95;
      u.exact_measure = false;
    }
  }
  u.measure = std::max(0.0, u.measure - u.overlap);
  u.measure_half_width = std::sqrt(var);
  return u;
}

std::vector<std::size_t> exclusion_violations(const ShapeUnion& shape, const std::vector<Point>& excluded) {
  std::vector<char> hit(excluded.size(), 0);
  parallel_for(excluded.size(), [&](std::size_t i) { hit[i] = shape.contains(excluded[i]) ? 1 : 0; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (hit[i]) out.push_back(i);
  }
  return out;
}

bool check_exclusion(const ShapeUnion& shape, const std::vector<Point>& excluded) {
  return exclusion_violations(shape, excluded).empty();
}

}  // namespace safeset::geometry
