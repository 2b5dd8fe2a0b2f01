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
#include "safeset/geometry/hull_membership.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace safeset::geometry {

HullMembership::HullMembership(std::vector<Point> points, double tolerance)
    : points_(std::move(points)), tol_(tolerance) {
  if (points_.empty()) return;
  n_ = static_cast<int>(points_.front().size());
  lo_.assign(static_cast<std::size_t>(n_), std::numeric_limits<double>::infinity());
  hi_.assign(static_cast<std::size_t>(n_), -std::numeric_limits<double>::infinity());
  for (const auto& p : points_) {
    for (std::size_t d = 0; d < p.size(); ++d) {
      lo_[d] = std::min(lo_[d], p[d]);
      hi_[d] = std::max(hi_[d], p[d]);
    }
  }
}

bool HullMembership::contains(const double* x) const {
  if (points_.empty()) return false;
  const auto n = static_cast<std::size_t>(n_);
  for (std::size_t d = 0; d < n; ++d) {
    if (x[d] < lo_[d] - tol_ || x[d] > hi_[d] + tol_) return false;
  }
  for (const auto& p : points_) {
    bool same = true;
    for (std::size_t d = 0; d < n && same; ++d) same = std::fabs(p[d] - x[d]) <= tol_;
    if (same) return true;
  }

  // Phase-one simplex on rows {coordinates..., sum}, with one artificial
  // variable per row.
  const std::size_t cols = points_.size();
  const std::size_t m = n + 1;
  const std::size_t width = cols + m + 1;
  const std::size_t rhs = width - 1;
  std::vector<double> t((m + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return t[r * width + c]; };
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    double b = r < n ? x[r] : 1.0;
    const double sign = b < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < cols; ++j) at(r, j) = sign * (r < n ? points_[j][r] : 1.0);
    at(r, cols + r) = 1.0;
    at(r, rhs) = sign * b;
    basis[r] = cols + r;
  }
  for (std::size_t c = 0; c < width; ++c) {
    if (c >= cols && c < cols + m) continue;
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += at(r, c);
    at(m, c) = -s;
  }

  const double eps = 1e-12;
  const std::size_t max_iter = 50 * (cols + m);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::size_t enter = width;
    double best = -eps;
    for (std::size_t j = 0; j < cols; ++j) {
      if (at(m, j) < best) {
        best = at(m, j);
        enter = j;
      }
    }
    if (enter == width) break;
    std::size_t leave = m;
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double a = at(r, enter);
      if (a > eps) {
        const double q = at(r, rhs) / a;
        if (q < ratio - 1e-15 || (q <= ratio + 1e-15 && leave < m && basis[r] < basis[leave])) {
          ratio = q;
          leave = r;
        }
      }
    }
    if (leave == m) break;
    const double piv = at(leave, enter);
    for (std::size_t c = 0; c < width; ++c) at(leave, c) /= piv;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) at(r, c) -= f * at(leave, c);
    }
    basis[leave] = enter;
  }
  return -at(m, rhs) <= tol_;
}

}  // namespace safeset::geometry
