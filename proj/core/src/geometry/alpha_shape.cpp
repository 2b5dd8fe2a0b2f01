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
#include "safeset/geometry/alpha_shape.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "safeset/error.hpp"

namespace safeset::geometry {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// Linear scan with a bounding-box prefilter, for a handful of queries.
bool in_some_top(const SimplicialComplex& c, const std::vector<int>& tops, const double* p, double tol) {
  const int n = c.dimension;
  const auto un = static_cast<std::size_t>(n);
  const double pad = tol * c.scale;
  for (int t : tops) {
    const auto& verts = c.top()[static_cast<std::size_t>(t)].vertices;
    bool inside_box = true;
    for (std::size_t d = 0; d < un && inside_box; ++d) {
      double a = INFINITY, b = -INFINITY;
      for (int v : verts) {
        a = std::min(a, c.points[static_cast<std::size_t>(v)][d]);
        b = std::max(b, c.points[static_cast<std::size_t>(v)][d]);
      }
      inside_box = p[d] >= a - pad && p[d] <= b + pad;
    }
    if (!inside_box) continue;
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd rel(n);
    const auto& o = c.points[static_cast<std::size_t>(verts[0])];
    for (int col = 0; col < n; ++col) {
      const auto& vc = c.points[static_cast<std::size_t>(verts[static_cast<std::size_t>(col + 1)])];
      for (int r = 0; r < n; ++r) m(r, col) = vc[static_cast<std::size_t>(r)] - o[static_cast<std::size_t>(r)];
    }
    for (int r = 0; r < n; ++r) rel[r] = p[r] - o[static_cast<std::size_t>(r)];
    const Eigen::VectorXd lam = m.fullPivLu().solve(rel);
    if (lam.minCoeff() >= -tol && 1.0 - lam.sum() >= -tol) return true;
  }
  return false;
}

}  // namespace

// Uniform grid over item bounding boxes; oversized items go to a list that
// every query scans.
class SimplexIndex {
 public:
  SimplexIndex(const SimplicialComplex& c, const std::vector<std::vector<int>>& included, double tol)
      : c_(c), n_(c.dimension), tol_(tol) {
    const auto un = static_cast<std::size_t>(n_);
    const auto& tops = c.top();
    // dangling lower simplices: not a face of any included top
    for (int t : included[un]) items_.push_back({static_cast<int>(un), t});
    std::unordered_set<std::uint64_t> faces;
    const int m = n_ + 1;
    auto face_key = [](const int* v, int count) {
      std::uint64_t h = 1469598103934665603ULL;
      for (int i = 0; i < count; ++i) h = (h ^ static_cast<std::uint64_t>(v[i])) * 1099511628211ULL;
      return h ^ static_cast<std::uint64_t>(count);
    };
    for (int t : included[un]) {
      const auto& tv = tops[static_cast<std::size_t>(t)].vertices;
      for (int mask = 1; mask < (1 << m) - 1; ++mask) {
        int buf[8];
        int cnt = 0;
        for (int i = 0; i < m; ++i) {
          if (mask & (1 << i)) buf[cnt++] = tv[static_cast<std::size_t>(i)];
        }
        faces.insert(face_key(buf, cnt));
      }
    }
    for (std::size_t k = 0; k < un; ++k) {
      for (int s : included[k]) {
        const auto& verts = c.simplices[k][static_cast<std::size_t>(s)].vertices;
        // a hash collision only hides a dangling face that is almost surely
        // covered by included tops anyway
        if (!faces.count(face_key(verts.data(), static_cast<int>(verts.size())))) items_.push_back({static_cast<int>(k), s});
      }
    }

    lo_.assign(un, INFINITY);
    hi_.assign(un, -INFINITY);
    box_lo_.resize(items_.size() * un);
    box_hi_.resize(items_.size() * un);
    inverse_.resize(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const auto& verts = vertices(items_[i]);
      for (std::size_t d = 0; d < un; ++d) {
        double a = INFINITY, b = -INFINITY;
        for (int v : verts) {
          a = std::min(a, c.points[static_cast<std::size_t>(v)][d]);
          b = std::max(b, c.points[static_cast<std::size_t>(v)][d]);
        }
        const double pad = tol_ * c.scale;
        box_lo_[i * un + d] = a - pad;
        box_hi_[i * un + d] = b + pad;
        lo_[d] = std::min(lo_[d], a - pad);
        hi_[d] = std::max(hi_[d], b + pad);
      }
      if (items_[i].k == n_) {
        Eigen::MatrixXd m(n_, n_);
        const auto& o = c.points[static_cast<std::size_t>(verts[0])];
        for (int col = 0; col < n_; ++col) {
          const auto& vc = c.points[static_cast<std::size_t>(verts[static_cast<std::size_t>(col + 1)])];
          for (int r = 0; r < n_; ++r) m(r, col) = vc[static_cast<std::size_t>(r)] - o[static_cast<std::size_t>(r)];
        }
        inverse_[i] = m.fullPivLu().inverse();
      }
    }
    if (items_.empty()) return;

    // Grid pyramid: each item goes to the finest level where its box touches
    // at most 64 cells, so large simplices do not flood a fine grid.
    const double per_dim = std::pow(static_cast<double>(items_.size()), 1.0 / n_);
    int finest = std::clamp(static_cast<int>(std::ceil(per_dim)), 1, 64);
    for (int cells = finest;; cells = (cells + 1) / 2) {
      levels_.push_back(Level{cells, {}});
      if (cells == 1) break;
    }
    for (std::size_t i = 0; i < items_.size(); ++i) {
      for (std::size_t l = 0; l < levels_.size(); ++l) {
        Level& level = levels_[l];
        std::vector<int> a(un), b(un);
        double span = 1.0;
        for (std::size_t d = 0; d < un; ++d) {
          a[d] = cell(box_lo_[i * un + d], d, level.cells);
          b[d] = cell(box_hi_[i * un + d], d, level.cells);
          span *= b[d] - a[d] + 1;
        }
        if (span > 64 && l + 1 < levels_.size()) continue;
        std::vector<int> cur = a;
        for (;;) {
          level.grid[flat(cur, level.cells)].push_back(static_cast<int>(i));
          std::size_t d = 0;
          while (d < un && cur[d] == b[d]) {
            cur[d] = a[d];
            ++d;
          }
          if (d == un) break;
          ++cur[d];
        }
        break;
      }
    }
  }

  bool contains(const double* p, bool tops_only = false) const {
    if (items_.empty()) return false;
    const auto un = static_cast<std::size_t>(n_);
    for (std::size_t d = 0; d < un; ++d) {
      if (p[d] < lo_[d] || p[d] > hi_[d]) return false;
    }
    std::vector<int> key(un);
    for (const Level& level : levels_) {
      for (std::size_t d = 0; d < un; ++d) key[d] = cell(p[d], d, level.cells);
      auto it = level.grid.find(flat(key, level.cells));
      if (it == level.grid.end()) continue;
      for (int i : it->second) {
        if (tops_only && items_[static_cast<std::size_t>(i)].k != n_) continue;
        if (test(static_cast<std::size_t>(i), p)) return true;
      }
    }
    return false;
  }

 private:
  struct Item {
    int k;
    int idx;
  };

  const std::vector<int>& vertices(const Item& it) const {
    return c_.simplices[static_cast<std::size_t>(it.k)][static_cast<std::size_t>(it.idx)].vertices;
  }

  struct Level {
    int cells;
    std::unordered_map<std::int64_t, std::vector<int>> grid;
  };

  int cell(double x, std::size_t d, int cells) const {
    const double w = hi_[d] - lo_[d];
    if (!(w > 0.0)) return 0;
    return std::clamp(static_cast<int>((x - lo_[d]) / w * cells), 0, cells - 1);
  }

  static std::int64_t flat(const std::vector<int>& key, int cells) {
    std::int64_t f = 0;
    for (int k : key) f = f * cells + k;
    return f;
  }

  bool test(std::size_t i, const double* p) const {
    const auto un = static_cast<std::size_t>(n_);
    for (std::size_t d = 0; d < un; ++d) {
      if (p[d] < box_lo_[i * un + d] || p[d] > box_hi_[i * un + d]) return false;
    }
    const auto& verts = vertices(items_[i]);
    const auto& o = c_.points[static_cast<std::size_t>(verts[0])];
    Eigen::VectorXd rel(n_);
    for (std::size_t d = 0; d < un; ++d) rel[static_cast<Eigen::Index>(d)] = p[d] - o[d];
    const int k = items_[i].k;
    if (k == n_) {
      const Eigen::VectorXd lam = inverse_[i] * rel;
      return lam.minCoeff() >= -tol_ && 1.0 - lam.sum() >= -tol_;
    }
    if (k == 0) return rel.norm() <= tol_ * c_.scale;
    Eigen::MatrixXd m(n_, k);
    for (int col = 0; col < k; ++col) {
      const auto& vc = c_.points[static_cast<std::size_t>(verts[static_cast<std::size_t>(col + 1)])];
      for (std::size_t r = 0; r < un; ++r) m(static_cast<Eigen::Index>(r), col) = vc[r] - o[r];
    }
    const Eigen::VectorXd lam = m.colPivHouseholderQr().solve(rel);
    if ((m * lam - rel).norm() > tol_ * c_.scale) return false;
    return lam.minCoeff() >= -tol_ && 1.0 - lam.sum() >= -tol_;
  }

  const SimplicialComplex& c_;
  int n_;
  double tol_;
  std::vector<Item> items_;
  std::vector<double> box_lo_, box_hi_, lo_, hi_;
  std::vector<Eigen::MatrixXd> inverse_;
  std::vector<Level> levels_;
};

bool AlphaShape::contains(const std::vector<double>& p) const {
  if (static_cast<int>(p.size()) != dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "point has dimension " + std::to_string(p.size()) + ", shape has " +
                                                  std::to_string(dimension()));
  }
  return contains(p.data());
}

bool AlphaShape::contains(const double* p) const {
  if (!index) throw Error(ErrorCode::InvalidConfig, "alpha shape built without a point-location index");
  return index->contains(p);
}

AlphaShape alpha_complex(std::shared_ptr<const SimplicialComplex> c, double alpha, bool with_index) {
  AlphaShape s;
  s.alpha = alpha;
  const auto n = static_cast<std::size_t>(c->dimension);
  s.included.assign(n + 1, {});
  for (std::size_t k = 0; k <= n; ++k) {
    const auto& level = c->simplices[k];
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i].radius <= alpha) s.included[k].push_back(static_cast<int>(i));
    }
  }

  const auto& tops = c->top();
  std::vector<char> in_top(tops.size(), 0);
  for (int t : s.included[n]) {
    in_top[static_cast<std::size_t>(t)] = 1;
    s.measure += c->top_volume[static_cast<std::size_t>(t)];
  }
  UnionFind uf(tops.size());
  std::vector<char> covered(c->points.size(), 0);
  for (int t : s.included[n]) {
    for (int nb : c->top_adjacency[static_cast<std::size_t>(t)]) {
      if (nb >= 0 && in_top[static_cast<std::size_t>(nb)]) uf.unite(t, nb);
    }
    for (int v : tops[static_cast<std::size_t>(t)].vertices) covered[static_cast<std::size_t>(v)] = 1;
  }
  for (const auto& group : c->top_bridges) {
    int first = -1;
    for (int t : group) {
      if (!in_top[static_cast<std::size_t>(t)]) continue;
      if (first < 0) first = t;
      else uf.unite(t, first);
    }
  }
  int components = 0;
  for (int t : s.included[n]) components += uf.find(t) == t ? 1 : 0;
  s.complex = std::move(c);
  const SimplicialComplex& cx = *s.complex;

  // A point that is not a vertex of an included top simplex (it only touched
  // dropped flat ones) still counts when it lies inside one.
  std::vector<int> loose;
  for (const auto& v : cx.simplices[0]) {
    if (!covered[static_cast<std::size_t>(v.vertices[0])]) loose.push_back(v.vertices[0]);
  }
  if (with_index || loose.size() > 32) s.index = std::make_shared<SimplexIndex>(cx, s.included, s.tolerance);
  bool all = true;
  for (int v : loose) {
    const double* p = cx.points[static_cast<std::size_t>(v)].data();
    if (s.index ? s.index->contains(p, true) : in_some_top(cx, s.included[n], p, s.tolerance)) continue;
    ++components;
    all = false;
  }
  s.component_count = components;
  s.covers_all_points = all;
  if (!with_index) s.index.reset();
  return s;
}

bool single_polytope(const AlphaShape& s) { return s.component_count == 1 && s.covers_all_points && s.measure > 0.0; }

AlphaSearchResult search_optimal_alpha(const std::vector<Point>& points, const AlphaSearchOptions& options) {
  return search_optimal_alpha(std::make_shared<const SimplicialComplex>(delaunay(points, options.delaunay)), options);
}

AlphaSearchResult search_optimal_alpha(std::shared_ptr<const SimplicialComplex> c, const AlphaSearchOptions& options) {
  if (!(options.lo > 0.0) || !(options.hi > options.lo)) {
    throw Error(ErrorCode::InvalidConfig, "alpha search needs 0 < lo < hi");
  }
  const auto feasible = options.predicate ? options.predicate : single_polytope;
  AlphaSearchResult r;
  auto probe = [&](double alpha) {
    const AlphaShape s = alpha_complex(c, alpha, false);
    const bool ok = feasible(s);
    r.probes.push_back({alpha, ok, s.component_count});
    return ok;
  };

  double lo = options.lo;
  double hi = options.hi;
  if (!probe(hi)) {
    throw Error(ErrorCode::InfeasibleAtHi, "no single polytope at alpha = " + std::to_string(hi) +
                                               "; raise the upper bound or split the data");
  }
  while (hi - lo > options.threshold) {
    const double mid = std::sqrt(lo * hi);
    if (probe(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  for (const auto& a : r.probes) {
    for (const auto& b : r.probes) {
      if (a.alpha < b.alpha && a.feasible && !b.feasible) ++r.monotonicity_violations;
    }
  }
  r.alpha_star = hi;
  r.shape = alpha_complex(c, hi, true);
  return r;
}

bool check_exclusion(const AlphaShape& shape, const std::vector<Point>& excluded) {
  return std::none_of(excluded.begin(), excluded.end(), [&](const Point& p) { return shape.contains(p); });
}

}  // namespace safeset::geometry
