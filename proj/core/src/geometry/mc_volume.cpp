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
#include "safeset/geometry/mc_volume.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "safeset/error.hpp"
#include "safeset/parallel.hpp"

namespace safeset::geometry {

namespace {
constexpr std::uint64_t kBatch = 4096;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t d = 0; d < lo.size(); ++d) v *= std::max(0.0, hi[d] - lo[d]);
  return v;
}

bool Box::contains(const double* p) const {
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (p[d] < lo[d] || p[d] > hi[d]) return false;
  }
  return true;
}

bool Box::intersects(const Box& o) const {
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (hi[d] < o.lo[d] || o.hi[d] < lo[d]) return false;
  }
  return true;
}

Box Box::intersection(const Box& o) const {
  Box b{lo, hi};
  for (std::size_t d = 0; d < lo.size(); ++d) {
    b.lo[d] = std::max(lo[d], o.lo[d]);
    b.hi[d] = std::min(hi[d], o.hi[d]);
  }
  return b;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

VolumeEstimate mc_volume(const Membership& membership, const Box& bounds, std::uint64_t n_samples,
                         std::uint64_t seed) {
  if (n_samples < 1000) throw Error(ErrorCode::InvalidConfig, "mc_volume needs at least 1000 samples");
  VolumeEstimate r;
  r.samples = n_samples;
  const double v = bounds.volume();
  if (!(v > 0.0)) return r;

  const std::size_t batches = static_cast<std::size_t>((n_samples + kBatch - 1) / kBatch);
  std::vector<std::uint64_t> hits(batches, 0);
  const std::size_t n = bounds.lo.size();
  parallel_for(batches, [&](std::size_t b) {
    std::mt19937_64 rng(mix_seed(seed ^ mix_seed(b)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::uint64_t count = std::min<std::uint64_t>(kBatch, n_samples - b * kBatch);
    std::vector<double> x(n);
    std::uint64_t h = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      for (std::size_t d = 0; d < n; ++d) x[d] = bounds.lo[d] + unit(rng) * (bounds.hi[d] - bounds.lo[d]);
      if (membership(x.data())) ++h;
    }
    hits[b] = h;
  });
  for (auto h : hits) r.hits += h;
  const double p = static_cast<double>(r.hits) / static_cast<double>(n_samples);
  r.estimate = v * p;
  r.half_width_95 = 1.96 * v * std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
  return r;
}

}  // namespace safeset::geometry
