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
#include "safeset/geometry/delaunay.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <gmpxx.h>
#include <numeric>
#include <random>
#include <unordered_map>

#include "safeset/error.hpp"

namespace safeset::geometry {

namespace {

constexpr int kMaxLift = 8;  // lifted dimension n+1 <= 7, plus one spare
// Bound on the LU determinant error relative to the product of row norms
// (dimension <= 7, worst-case pivot growth).
// Error bound for the LU determinant relative to the product of row norms:
// entry rounding plus partial-pivoting growth of at most 2^(d-1), padded 4x.
double orient_filter(int d) {
  const double u = std::numeric_limits<double>::epsilon() / 2.0;
  return 4.0 * u * (d + std::ldexp(static_cast<double>(d), d - 1));
}

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxLift, kMaxLift>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxLift, 1>;

using Key = std::array<int, kMaxLift>;

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (int v : k) h = (h ^ static_cast<std::size_t>(v + 1)) * 0x100000001b3ull;
    return h;
  }
};

Key make_key(const int* v, int count, int skip) {
  Key k;
  k.fill(-1);
  int m = 0;
  for (int i = 0; i < count; ++i) {
    if (i != skip) k[static_cast<std::size_t>(m++)] = v[i];
  }
  std::sort(k.begin(), k.begin() + m);
  return k;
}

struct Facet {
  std::array<int, kMaxLift> v{};
  std::array<int, kMaxLift> nb{};
  bool alive = true;
};

// Incremental convex hull of lifted points in R^d, d = n + 1.
class LiftedHull {
 public:
  LiftedHull(int d, const std::vector<double>& coords, int apex)
      : d_(d), coords_(coords), apex_(apex), filter_(orient_filter(d)) {}

  const double* at(int i) const { return coords_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d_); }

  void init(const std::vector<int>& simplex) {
    interior_ = Vec::Zero(d_);
    for (int s : simplex) {
      for (int c = 0; c < d_; ++c) interior_[c] += at(s)[c];
    }
    interior_ /= static_cast<double>(simplex.size());

    const int m = static_cast<int>(simplex.size());  // d + 1
    facets_.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      Facet& f = facets_[static_cast<std::size_t>(i)];
      int slot = 0;
      for (int k = 0; k < m; ++k) {
        if (k == i) continue;
        f.v[static_cast<std::size_t>(slot)] = simplex[static_cast<std::size_t>(k)];
        f.nb[static_cast<std::size_t>(slot)] = k;  // facet k omits simplex vertex k
        ++slot;
      }
      orient_outward(f);
    }
    last_ = 0;
  }

  // Returns false when the point is not strictly outside the current hull.
  bool insert(int p) {
    const double* q = at(p);
    const int start = locate(q);
    if (start < 0) return false;

    ++stamp_;
    if (mark_.size() < facets_.size()) {
      mark_.resize(facets_.size(), 0);
      vis_.resize(facets_.size(), 0);
    }
    std::vector<int> visible{start};
    mark(start, true);
    std::vector<std::pair<int, int>> horizon;  // (visible facet, slot)
    for (std::size_t h = 0; h < visible.size(); ++h) {
      const int fi = visible[h];
      for (int s = 0; s < d_; ++s) {
        const int g = facets_[static_cast<std::size_t>(fi)].nb[static_cast<std::size_t>(s)];
        if (!marked(g)) {
          mark(g, is_visible(g, q));
          if (vis_[static_cast<std::size_t>(g)]) visible.push_back(g);
        }
        if (!vis_[static_cast<std::size_t>(g)]) horizon.emplace_back(fi, s);
      }
    }

    struct RidgeRef {
      Key key;
      int facet;
      int slot;
    };
    std::vector<RidgeRef> ridges;
    std::vector<int> created;
    created.reserve(horizon.size());
    for (auto [fi, s] : horizon) {
      Facet nf = facets_[static_cast<std::size_t>(fi)];
      const int g = nf.nb[static_cast<std::size_t>(s)];
      nf.v[static_cast<std::size_t>(s)] = p;
      nf.alive = true;
      const int id = allocate();
      int gslot = s;
      if (orient_outward(nf)) {
        if (gslot == 0) gslot = 1;
        else if (gslot == 1) gslot = 0;
      }
      for (int k = 0; k < d_; ++k) nf.nb[static_cast<std::size_t>(k)] = -1;
      nf.nb[static_cast<std::size_t>(gslot)] = g;
      facets_[static_cast<std::size_t>(id)] = nf;
      Facet& gf = facets_[static_cast<std::size_t>(g)];
      for (int k = 0; k < d_; ++k) {
        if (gf.nb[static_cast<std::size_t>(k)] == fi) gf.nb[static_cast<std::size_t>(k)] = id;
      }
      for (int k = 0; k < d_; ++k) {
        if (k == gslot) continue;
        ridges.push_back({make_key(nf.v.data(), d_, k), id, k});
      }
      created.push_back(id);
    }
    std::sort(ridges.begin(), ridges.end(), [](const RidgeRef& a, const RidgeRef& b) { return a.key < b.key; });
    for (std::size_t i = 0; i + 1 < ridges.size(); i += 2) {
      if (ridges[i].key != ridges[i + 1].key) {
        // Inconsistent cavity boundary; should not happen with perturbed input.
        --i;
        continue;
      }
      facets_[static_cast<std::size_t>(ridges[i].facet)].nb[static_cast<std::size_t>(ridges[i].slot)] =
          ridges[i + 1].facet;
      facets_[static_cast<std::size_t>(ridges[i + 1].facet)].nb[static_cast<std::size_t>(ridges[i + 1].slot)] =
          ridges[i].facet;
    }
    for (int fi : visible) {
      facets_[static_cast<std::size_t>(fi)].alive = false;
      free_.push_back(fi);
    }
    last_ = created.empty() ? last_ : created.front();
    return true;
  }

  const std::vector<Facet>& facets() const { return facets_; }

  // Sign of the orientation of q against facet f; positive when q is on the
  // outer side. Falls back to exact rational arithmetic when the floating
  // point value is within its error bound.
  int orientation(const Facet& f, const double* q) const {
    Mat m(d_, d_);
    const double* o = at(f.v[0]);
    double b = 1.0;
    for (int r = 0; r < d_; ++r) {
      const double* row = r + 1 < d_ ? at(f.v[static_cast<std::size_t>(r + 1)]) : q;
      double norm = 0.0;
      for (int c = 0; c < d_; ++c) {
        m(r, c) = row[c] - o[c];
        norm += m(r, c) * m(r, c);
      }
      b *= std::sqrt(norm);
    }
    const double det = m.partialPivLu().determinant();
    if (std::fabs(det) > filter_ * b) return det > 0.0 ? 1 : -1;
    return exact_orientation(f, q);
  }

 private:
  // Doubles are integers after scaling each column by a power of two, which
  // leaves the sign of the determinant alone; Bareiss elimination then stays
  // in exact integer arithmetic.
  int exact_orientation(const Facet& f, const double* q) const {
    std::array<const double*, kMaxLift + 1> rows{};
    for (int r = 0; r < d_; ++r) rows[static_cast<std::size_t>(r)] = at(f.v[static_cast<std::size_t>(r)]);
    rows[static_cast<std::size_t>(d_)] = q;
    std::vector<mpz_class> m(static_cast<std::size_t>(d_ * d_));
    for (int c = 0; c < d_; ++c) {
      int emin = std::numeric_limits<int>::max();
      for (int r = 0; r <= d_; ++r) {
        const double x = rows[static_cast<std::size_t>(r)][c];
        if (x == 0.0) continue;
        int e = 0;
        std::frexp(x, &e);
        emin = std::min(emin, e - std::numeric_limits<double>::digits);
      }
      if (emin == std::numeric_limits<int>::max()) return 0;  // zero column
      auto to_int = [&](double x) {
        mpz_class z;
        mpz_set_d(z.get_mpz_t(), std::ldexp(std::frexp(x, &scratch_), std::numeric_limits<double>::digits));
        const int shift = scratch_ - std::numeric_limits<double>::digits - emin;
        if (shift > 0) z <<= static_cast<mp_bitcnt_t>(shift);
        return z;
      };
      const mpz_class origin = rows[0][c] == 0.0 ? mpz_class(0) : to_int(rows[0][c]);
      for (int r = 0; r < d_; ++r) {
        const double x = rows[static_cast<std::size_t>(r + 1)][c];
        m[static_cast<std::size_t>(r * d_ + c)] = (x == 0.0 ? mpz_class(0) : to_int(x)) - origin;
      }
    }
    int sign = 1;
    mpz_class prev = 1;
    for (int k = 0; k < d_; ++k) {
      int piv = -1;
      for (int r = k; r < d_; ++r) {
        if (sgn(m[static_cast<std::size_t>(r * d_ + k)]) != 0) {
          piv = r;
          break;
        }
      }
      if (piv < 0) return 0;
      if (piv != k) {
        for (int c = 0; c < d_; ++c) std::swap(m[static_cast<std::size_t>(piv * d_ + c)], m[static_cast<std::size_t>(k * d_ + c)]);
        sign = -sign;
      }
      const mpz_class& p = m[static_cast<std::size_t>(k * d_ + k)];
      for (int r = k + 1; r < d_; ++r) {
        for (int c = k + 1; c < d_; ++c) {
          mpz_class& e = m[static_cast<std::size_t>(r * d_ + c)];
          e = p * e - m[static_cast<std::size_t>(r * d_ + k)] * m[static_cast<std::size_t>(k * d_ + c)];
          mpz_divexact(e.get_mpz_t(), e.get_mpz_t(), prev.get_mpz_t());
        }
      }
      prev = p;
    }
    return sign * sgn(m[static_cast<std::size_t>((d_ - 1) * d_ + d_ - 1)]);
  }

  int allocate() {
    if (!free_.empty()) {
      const int id = free_.back();
      free_.pop_back();
      return id;
    }
    facets_.emplace_back();
    mark_.push_back(0);
    vis_.push_back(0);
    return static_cast<int>(facets_.size()) - 1;
  }

  void mark(int f, bool visible) {
    mark_[static_cast<std::size_t>(f)] = stamp_;
    vis_[static_cast<std::size_t>(f)] = visible ? 1 : 0;
  }
  bool marked(int f) const { return mark_[static_cast<std::size_t>(f)] == stamp_; }

  // Flips the vertex order when needed so the interior is on the negative
  // side; returns true when it flipped.
  bool orient_outward(Facet& f) const {
    if (orientation(f, interior_.data()) > 0) {
      std::swap(f.v[0], f.v[1]);
      std::swap(f.nb[0], f.nb[1]);
      return true;
    }
    return false;
  }

  bool is_visible(int fi, const double* q) const { return orientation(facets_[static_cast<std::size_t>(fi)], q) > 0; }

  bool has_apex(const Facet& f) const {
    for (int k = 0; k < d_; ++k) {
      if (f.v[static_cast<std::size_t>(k)] == apex_) return true;
    }
    return false;
  }

  // Visibility walk over the projected lower facets, falling back to a
  // breadth-first scan of the whole hull.
  int locate(const double* q) {
    int cur = last_;
    if (cur < 0 || cur >= static_cast<int>(facets_.size()) || !facets_[static_cast<std::size_t>(cur)].alive) {
      cur = -1;
      for (std::size_t i = 0; i < facets_.size(); ++i) {
        if (facets_[i].alive) {
          cur = static_cast<int>(i);
          break;
        }
      }
    }
    const int n = d_ - 1;
    const std::size_t limit = 64 + 8 * facets_.size();
    for (std::size_t step = 0; step < limit && cur >= 0; ++step) {
      if (is_visible(cur, q)) return cur;
      const Facet& f = facets_[static_cast<std::size_t>(cur)];
      if (has_apex(f)) break;
      Mat m(n, n);
      Vec rhs(n);
      const double* o = at(f.v[0]);
      for (int c = 1; c <= n; ++c) {
        const double* vc = at(f.v[static_cast<std::size_t>(c)]);
        for (int r = 0; r < n; ++r) m(r, c - 1) = vc[r] - o[r];
      }
      for (int r = 0; r < n; ++r) rhs[r] = q[r] - o[r];
      const Vec lam = m.partialPivLu().solve(rhs);
      double l0 = 1.0 - lam.sum();
      int worst = 0;
      double worst_val = l0;
      for (int c = 1; c <= n; ++c) {
        if (lam[c - 1] < worst_val) {
          worst_val = lam[c - 1];
          worst = c;
        }
      }
      if (!(worst_val < 0.0)) break;  // inside this simplex, yet not visible
      cur = f.nb[static_cast<std::size_t>(worst)];
    }
    return scan(q, cur);
  }

  int scan(const double* q, int from) {
    ++stamp_;
    if (mark_.size() < facets_.size()) {
      mark_.resize(facets_.size(), 0);
      vis_.resize(facets_.size(), 0);
    }
    std::deque<int> queue;
    if (from >= 0 && facets_[static_cast<std::size_t>(from)].alive) {
      queue.push_back(from);
      mark(from, false);
    }
    while (!queue.empty()) {
      const int fi = queue.front();
      queue.pop_front();
      if (is_visible(fi, q)) return fi;
      for (int s = 0; s < d_; ++s) {
        const int g = facets_[static_cast<std::size_t>(fi)].nb[static_cast<std::size_t>(s)];
        if (g >= 0 && !marked(g)) {
          mark(g, false);
          queue.push_back(g);
        }
      }
    }
    // Disconnected start (should not happen): exhaustive pass.
    for (std::size_t i = 0; i < facets_.size(); ++i) {
      if (facets_[i].alive && !marked(static_cast<int>(i)) && is_visible(static_cast<int>(i), q)) {
        return static_cast<int>(i);
      }
    }
    return -1;
  }

  int d_;
  const std::vector<double>& coords_;
  int apex_;
  double filter_;
  mutable int scratch_ = 0;
  Vec interior_;
  std::vector<Facet> facets_;
  std::vector<int> free_;
  std::vector<std::uint32_t> mark_;
  std::vector<char> vis_;
  std::uint32_t stamp_ = 0;
  int last_ = -1;
};

std::uint64_t morton(const double* u, int n) {
  const int bits = std::min(21, 63 / std::max(1, n));
  const double span = static_cast<double>((1ull << bits) - 1);
  std::uint64_t code = 0;
  std::array<std::uint64_t, kMaxLift> q{};
  for (int k = 0; k < n; ++k) {
    const double t = std::clamp(u[k] + 0.5, 0.0, 1.0);
    q[static_cast<std::size_t>(k)] = static_cast<std::uint64_t>(t * span);
  }
  for (int b = bits - 1; b >= 0; --b) {
    for (int k = 0; k < n; ++k) code = (code << 1) | ((q[static_cast<std::size_t>(k)] >> b) & 1u);
  }
  return code;
}

}  // namespace

double simplex_volume(const std::vector<const double*>& vertices, int n) {
  Mat m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = vertices[static_cast<std::size_t>(r + 1)][c] - vertices[0][c];
  }
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  return std::fabs(m.partialPivLu().determinant()) / fact;
}

bool circumsphere(const std::vector<const double*>& vertices, int n, std::vector<double>& center, double& radius) {
  const int k = static_cast<int>(vertices.size()) - 1;
  center.assign(vertices[0], vertices[0] + n);
  radius = 0.0;
  if (k == 0) return true;
  Eigen::MatrixXd a(k, n);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = vertices[static_cast<std::size_t>(r + 1)][c] - vertices[0][c];
  }
  const Eigen::MatrixXd gram = a * a.transpose();
  const Eigen::VectorXd rhs = 0.5 * gram.diagonal();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < k) return false;
  const Eigen::VectorXd lam = lu.solve(rhs);
  const Eigen::VectorXd offset = a.transpose() * lam;
  for (int c = 0; c < n; ++c) center[static_cast<std::size_t>(c)] += offset[c];
  radius = offset.norm();
  return std::isfinite(radius);
}

SimplicialComplex delaunay(const std::vector<Point>& points, const DelaunayOptions& options) {
  if (points.empty()) throw Error(ErrorCode::DegenerateInput, "no points");
  const int n = static_cast<int>(points.front().size());
  if (n < 1) throw Error(ErrorCode::DegenerateInput, "zero-dimensional points");
  if (n > options.max_dimension || n + 1 >= kMaxLift) {
    throw Error(ErrorCode::DimensionTooHigh, "dimension " + std::to_string(n) + " exceeds the exact Delaunay cap " +
                                                 std::to_string(std::min(options.max_dimension, kMaxLift - 2)));
  }
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != n) throw Error(ErrorCode::DimensionMismatch, "mixed point dimensions");
  }
  const int count = static_cast<int>(points.size());
  if (count < n + 1) {
    throw Error(ErrorCode::DegenerateInput, "need at least " + std::to_string(n + 1) + " points in " +
                                                std::to_string(n) + "-d");
  }

  SimplicialComplex cx;
  cx.dimension = n;
  cx.points = points;
  cx.simplices.assign(static_cast<std::size_t>(n + 1), {});

  std::vector<double> lo(static_cast<std::size_t>(n), INFINITY), hi(static_cast<std::size_t>(n), -INFINITY);
  for (const auto& p : points) {
    for (int k = 0; k < n; ++k) {
      lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k)]);
      hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k)]);
    }
  }
  double diam2 = 0.0;
  for (int k = 0; k < n; ++k) diam2 += std::pow(hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)], 2);
  cx.scale = std::sqrt(diam2);
  if (!(cx.scale > 0.0) || !std::isfinite(cx.scale)) throw Error(ErrorCode::DegenerateInput, "all points coincide");

  // Normalized coordinates u in roughly [-0.5, 0.5]^n.
  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<double> u(static_cast<std::size_t>(count) * un);
  for (int i = 0; i < count; ++i) {
    for (int k = 0; k < n; ++k) {
      const double mid = 0.5 * (lo[static_cast<std::size_t>(k)] + hi[static_cast<std::size_t>(k)]);
      u[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(k)] =
          (points[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] - mid) / cx.scale;
    }
  }

  // Merge points that coincide within tolerance.
  const double tol = options.tolerance;
  std::vector<char> skip(static_cast<std::size_t>(count), 0);
  {
    std::unordered_map<Key, std::vector<int>, KeyHash> cells;
    auto cell_of = [&](int i) {
      Key key;
      key.fill(0);
      for (int k = 0; k < n; ++k) {
        key[static_cast<std::size_t>(k)] =
            static_cast<int>(std::floor(u[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(k)] / tol));
      }
      return key;
    };
    for (int i = 0; i < count; ++i) {
      const Key base = cell_of(i);
      bool dup = false;
      const int neighbors = static_cast<int>(std::pow(3, n));
      for (int code = 0; code < neighbors && !dup; ++code) {
        Key key = base;
        int c = code;
        for (int k = 0; k < n; ++k, c /= 3) key[static_cast<std::size_t>(k)] += (c % 3) - 1;
        auto it = cells.find(key);
        if (it == cells.end()) continue;
        for (int j : it->second) {
          double dist = 0.0;
          for (int k = 0; k < n; ++k) {
            dist = std::max(dist, std::fabs(u[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(k)] -
                                            u[static_cast<std::size_t>(j) * un + static_cast<std::size_t>(k)]));
          }
          if (dist <= tol) {
            dup = true;
            break;
          }
        }
      }
      if (dup) {
        skip[static_cast<std::size_t>(i)] = 1;
      } else {
        cells[base].push_back(i);
      }
    }
  }

  // Perturb and lift. The apex sits far above the paraboloid so that
  // cospherical input still spans a full-dimensional lifted hull.
  const int d = n + 1;
  const int apex = count;
  std::vector<double> lifted(static_cast<std::size_t>(count + 1) * static_cast<std::size_t>(d), 0.0);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  // Small enough that the paraboloid stays convex at the scale of closely
  // spaced (but unmerged) samples, large enough to break exact ties.
  const double eps = 1e-5 * tol;
  for (int i = 0; i < count; ++i) {
    double z = 0.0;
    double* row = lifted.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d);
    for (int k = 0; k < n; ++k) {
      row[k] = u[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(k)] + eps * jitter(rng);
      z += row[k] * row[k];
    }
    row[n] = z;
  }
  lifted[static_cast<std::size_t>(apex) * static_cast<std::size_t>(d) + static_cast<std::size_t>(n)] = 4.0;

  // Initial n-simplex: greedy farthest points from the growing affine span.
  std::vector<int> simplex;
  {
    std::vector<Eigen::VectorXd> basis;
    int first = -1;
    double best = -1.0;
    for (int i = 0; i < count; ++i) {
      if (skip[static_cast<std::size_t>(i)]) continue;
      double r = 0.0;
      for (int k = 0; k < n; ++k) r += std::pow(u[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(k)], 2);
      if (r > best) {
        best = r;
        first = i;
      }
    }
    simplex.push_back(first);
    Eigen::Map<const Eigen::VectorXd> origin(u.data() + static_cast<std::size_t>(first) * un, n);
    for (int dim = 0; dim < n; ++dim) {
      int pick = -1;
      double far = 0.0;
      Eigen::VectorXd pick_dir;
      for (int i = 0; i < count; ++i) {
        if (skip[static_cast<std::size_t>(i)]) continue;
        Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(u.data() + static_cast<std::size_t>(i) * un, n) - origin;
        for (const auto& b : basis) w -= b.dot(w) * b;
        const double len = w.norm();
        if (len > far) {
          far = len;
          pick = i;
          pick_dir = w;
        }
      }
      if (pick < 0 || far <= 100.0 * tol) {
        throw Error(ErrorCode::DegenerateInput, "points are affinely dependent (span " + std::to_string(dim) +
                                                    " of " + std::to_string(n) + " dimensions)");
      }
      basis.push_back(pick_dir / far);
      simplex.push_back(pick);
    }
  }
  std::vector<char> in_simplex(static_cast<std::size_t>(count), 0);
  for (int s : simplex) in_simplex[static_cast<std::size_t>(s)] = 1;
  std::vector<int> init = simplex;
  init.push_back(apex);

  LiftedHull hull(d, lifted, apex);
  hull.init(init);

  // Biased randomized insertion order: shuffled, split into doubling rounds,
  // each round sorted along a Morton curve.
  std::vector<int> order;
  for (int i = 0; i < count; ++i) {
    if (!skip[static_cast<std::size_t>(i)] && !in_simplex[static_cast<std::size_t>(i)]) order.push_back(i);
  }
  std::shuffle(order.begin(), order.end(), rng);
  {
    std::vector<std::uint64_t> code(static_cast<std::size_t>(count), 0);
    for (int i : order) code[static_cast<std::size_t>(i)] = morton(u.data() + static_cast<std::size_t>(i) * un, n);
    std::size_t begin = 0;
    std::size_t size = 1;
    while (begin < order.size()) {
      const std::size_t end = std::min(order.size(), begin + size);
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end),
                [&](int a, int b) { return code[static_cast<std::size_t>(a)] < code[static_cast<std::size_t>(b)]; });
      begin = end;
      size *= 2;
    }
  }
  for (int i : order) {
    if (!hull.insert(i)) skip[static_cast<std::size_t>(i)] = 1;
  }

  // Lower facets that avoid the apex are the Delaunay simplices.
  const auto& facets = hull.facets();
  std::vector<int> top_of(facets.size(), -1);
  std::vector<std::vector<int>> raw_vertices;
  std::vector<std::vector<int>> raw_neighbors;  // facet ids, aligned with raw_vertices order
  std::vector<double> below(static_cast<std::size_t>(d), 0.0);
  std::vector<int> flat;
  for (std::size_t fi = 0; fi < facets.size(); ++fi) {
    const Facet& f = facets[fi];
    if (!f.alive) continue;
    bool apex_facet = false;
    for (int k = 0; k < d; ++k) apex_facet = apex_facet || f.v[static_cast<std::size_t>(k)] == apex;
    if (apex_facet) continue;
    const double* o = lifted.data() + static_cast<std::size_t>(f.v[0]) * static_cast<std::size_t>(d);
    std::copy(o, o + d, below.begin());
    below[static_cast<std::size_t>(n)] -= 1.0;
    if (hull.orientation(f, below.data()) <= 0) continue;  // not a lower facet

    std::vector<const double*> verts;
    for (int k = 0; k < d; ++k) verts.push_back(points[static_cast<std::size_t>(f.v[static_cast<std::size_t>(k)])].data());
    const double vol = simplex_volume(verts, n);
    double edge_product = 1.0;
    for (int k = 1; k < d; ++k) {
      double e = 0.0;
      for (int c = 0; c < n; ++c) e += std::pow(verts[static_cast<std::size_t>(k)][c] - verts[0][c], 2);
      edge_product *= std::sqrt(e);
    }
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    if (!(vol * fact > 1e-10 * edge_product)) {  // flat after un-perturbing
      flat.push_back(static_cast<int>(fi));
      continue;
    }

    top_of[fi] = static_cast<int>(raw_vertices.size());
    raw_vertices.emplace_back(f.v.begin(), f.v.begin() + d);
    raw_neighbors.emplace_back(f.nb.begin(), f.nb.begin() + d);
    cx.top_volume.push_back(vol);
  }

  auto& top = cx.simplices[un];
  top.reserve(raw_vertices.size());
  cx.top_adjacency.resize(raw_vertices.size());
  for (std::size_t t = 0; t < raw_vertices.size(); ++t) {
    std::vector<int> idx(static_cast<std::size_t>(d));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return raw_vertices[t][static_cast<std::size_t>(a)] < raw_vertices[t][static_cast<std::size_t>(b)];
    });
    Simplex s;
    auto& adj = cx.top_adjacency[t];
    for (int k : idx) {
      s.vertices.push_back(raw_vertices[t][static_cast<std::size_t>(k)]);
      const int nb = raw_neighbors[t][static_cast<std::size_t>(k)];
      adj.push_back(nb >= 0 ? top_of[static_cast<std::size_t>(nb)] : -1);
    }
    std::vector<const double*> verts;
    for (int v : s.vertices) verts.push_back(points[static_cast<std::size_t>(v)].data());
    std::vector<double> center;
    double radius = INFINITY;
    if (!circumsphere(verts, n, center, radius)) radius = INFINITY;
    s.radius = radius;
    top.push_back(std::move(s));
  }

  // Flat simplices were dropped, but the simplices on either side of a sheet
  // of them still touch along a full facet-sized patch.
  {
    std::unordered_map<int, int> slot;
    for (std::size_t i = 0; i < flat.size(); ++i) slot[flat[i]] = static_cast<int>(i);
    std::vector<int> parent(flat.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const Facet& f = facets[static_cast<std::size_t>(flat[i])];
      for (int k = 0; k < d; ++k) {
        auto it = slot.find(f.nb[static_cast<std::size_t>(k)]);
        if (it != slot.end()) parent[static_cast<std::size_t>(find(static_cast<int>(i)))] = find(it->second);
      }
    }
    std::unordered_map<int, std::vector<int>> groups;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const Facet& f = facets[static_cast<std::size_t>(flat[i])];
      auto& g = groups[find(static_cast<int>(i))];
      for (int k = 0; k < d; ++k) {
        const int nb = f.nb[static_cast<std::size_t>(k)];
        if (nb >= 0 && top_of[static_cast<std::size_t>(nb)] >= 0) g.push_back(top_of[static_cast<std::size_t>(nb)]);
      }
    }
    for (auto& [root, g] : groups) {
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
      if (g.size() > 1) cx.top_bridges.push_back(std::move(g));
    }
    std::sort(cx.top_bridges.begin(), cx.top_bridges.end());
  }

  for (int i = 0; i < count; ++i) {
    if (skip[static_cast<std::size_t>(i)]) {
      cx.skipped.push_back(i);
    } else {
      cx.simplices[0].push_back(Simplex{{i}, 0.0});
    }
  }

  if (options.build_faces) {
    for (int k = n - 1; k >= 1; --k) {
      const auto& upper = cx.simplices[static_cast<std::size_t>(k + 1)];
      std::unordered_map<Key, int, KeyHash> index;
      std::vector<Simplex> faces;
      std::vector<double> cofacet_min;
      std::vector<std::vector<int>> opposite;  // vertices of cofacets not in the face
      for (const auto& s : upper) {
        for (int drop = 0; drop <= k + 1; ++drop) {
          const Key key = make_key(s.vertices.data(), k + 2, drop);
          auto [it, inserted] = index.try_emplace(key, static_cast<int>(faces.size()));
          if (inserted) {
            Simplex f;
            f.vertices.assign(key.begin(), key.begin() + k + 1);
            faces.push_back(std::move(f));
            cofacet_min.push_back(INFINITY);
            opposite.emplace_back();
          }
          const auto fi = static_cast<std::size_t>(it->second);
          cofacet_min[fi] = std::min(cofacet_min[fi], s.radius);
          opposite[fi].push_back(s.vertices[static_cast<std::size_t>(drop)]);
        }
      }
      for (std::size_t fi = 0; fi < faces.size(); ++fi) {
        std::vector<const double*> verts;
        for (int v : faces[fi].vertices) verts.push_back(points[static_cast<std::size_t>(v)].data());
        std::vector<double> center;
        double r = INFINITY;
        bool attached = !circumsphere(verts, n, center, r);
        for (int w : opposite[fi]) {
          if (attached) break;
          double dist = 0.0;
          for (int c = 0; c < n; ++c) {
            dist += std::pow(points[static_cast<std::size_t>(w)][static_cast<std::size_t>(c)] -
                                 center[static_cast<std::size_t>(c)],
                             2);
          }
          attached = std::sqrt(dist) < r * (1.0 - 1e-12);
        }
        faces[fi].radius = attached ? cofacet_min[fi] : std::min(r, cofacet_min[fi]);
      }
      std::sort(faces.begin(), faces.end(),
                [](const Simplex& a, const Simplex& b) { return a.vertices < b.vertices; });
      cx.simplices[static_cast<std::size_t>(k)] = std::move(faces);
    }
  }
  return cx;
}

}  // namespace safeset::geometry
