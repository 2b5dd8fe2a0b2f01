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

#include <vector>

#include "safeset/geometry/delaunay.hpp"

namespace safeset::geometry {

/// Convex-hull membership by linear-programming feasibility: x is in the
/// hull of P iff x = P lambda for some lambda >= 0 summing to 1. Used where
/// an explicit facet description is out of reach (high dimension).
class HullMembership {
 public:
  HullMembership() = default;
  explicit HullMembership(std::vector<Point> points, double tolerance = 1e-9);

  int dimension() const { return n_; }
  bool contains(const double* x) const;
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<Point>& points() const { return points_; }

 private:
  std::vector<Point> points_;
  std::vector<double> lo_, hi_;
  int n_ = 0;
  double tol_ = 1e-9;
};

}  // namespace safeset::geometry
