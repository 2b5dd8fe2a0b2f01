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
#include <vector>

namespace safeset::geometry {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  int dimension() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(const double* p) const;
  bool intersects(const Box& o) const;
  Box intersection(const Box& o) const;
};

struct VolumeEstimate {
  double estimate = 0.0;
  double half_width_95 = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
};

using Membership = std::function<bool(const double*)>;

/// Hit-or-miss estimate of the volume of {x in bounds : membership(x)}.
/// Samples are drawn in fixed batches whose seeds derive from `seed` and the
/// batch number, so the result does not depend on the thread count.
/// Throws InvalidConfig when n_samples < 1000.
VolumeEstimate mc_volume(const Membership& membership, const Box& bounds, std::uint64_t n_samples,
                         std::uint64_t seed);

/// splitmix64 step, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace safeset::geometry
