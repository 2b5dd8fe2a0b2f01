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
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "safeset/geometry/delaunay.hpp"
#include "safeset/ingest.hpp"
#include "safeset/oss.hpp"

namespace fixtures {

using safeset::ingest::AgentType;
using safeset::ingest::Dataset;
using safeset::ingest::RawSample;

inline RawSample car(const std::string& traj, std::int64_t frame, double dt, const std::string& agent, double x,
                     double y, double vx, double vy, bool sv, int lane = -1, double length = 4.5, double width = 1.8) {
  RawSample s;
  s.recording_id = "r0";
  s.trajectory_id = traj;
  s.frame = frame;
  s.time = static_cast<double>(frame) * dt;
  s.agent_id = agent;
  s.agent_type = AgentType::Car;
  s.x = x;
  s.y = y;
  s.vx = vx;
  s.vy = vy;
  s.length = length;
  s.width = width;
  if (lane >= 0) s.lane_id = lane;
  s.sv_flag = sv;
  return s;
}

inline RawSample pedestrian(const std::string& traj, std::int64_t frame, double dt, const std::string& agent, double x,
                            double y) {
  RawSample s = car(traj, frame, dt, agent, x, y, 0.0, 0.0, false, -1, 0.0, 0.0);
  s.agent_type = AgentType::Pedestrian;
  return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("safeset_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Three-lane highway with a subject vehicle in the middle lane and one
// scripted neighbour per subregion. Offsets and speeds are smooth, mutually
// consistent functions of time so every frame is in the highd-multi box.
// Safe trajectories keep the front-centre clearance above 15 m. The optional
// unsafe trajectory starts with the front-centre car 6 m ahead and closes in
// until the bumpers touch.
inline Dataset multi_vehicle_dataset(int frames_per_trajectory, int safe_trajectories, bool unsafe_trajectory,
                                     std::uint64_t seed = 3) {
  constexpr double dt = 0.04;
  constexpr double lane = 3.75;
  constexpr double len = 4.5;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  Dataset d;
  d.dt = dt;
  struct Neighbour {
    const char* id;
    int lane;
    double base;  // centre-to-centre offset, m
    double amp;
    double omega;
  };
  auto run = [&](const std::string& traj, bool closing) {
    const Neighbour script[6] = {
        {"fl", 3, 30.0, 9.0, 0.21}, {"fc", 2, 28.0, 8.0, 0.17}, {"fr", 1, 26.0, 9.0, 0.23},
        {"rl", 3, -27.0, 9.0, 0.19}, {"rc", 2, -30.0, 8.0, 0.13}, {"rr", 1, -25.0, 9.0, 0.29},
    };
    double ph[6];
    for (double& p : ph) p = phase(rng);
    const double sv_phase = phase(rng);
    double x0 = 0.0;
    for (int f = 0; f < frames_per_trajectory; ++f) {
      const double t = f * dt;
      const double v0 = 25.0 + 2.0 * std::sin(0.11 * t + sv_phase);
      x0 += v0 * dt;
      d.samples.push_back(car(traj, f, dt, "sv", x0, 0.0, v0, 0.0, true, 2));
      for (int k = 0; k < 6; ++k) {
        const auto& n = script[k];
        double off = n.base + n.amp * std::sin(n.omega * t + ph[k]);
        double rel_v = n.amp * n.omega * std::cos(n.omega * t + ph[k]);
        if (closing && k == 1) {
          // front-centre car starts 6 m clear and closes linearly
          const double clear0 = 6.0;
          const double total = frames_per_trajectory * dt;
          off = len + clear0 * (1.0 - t / total);
          rel_v = -clear0 / total;
        }
        const double y = (n.lane - 2) * lane;
        d.samples.push_back(car(traj, f, dt, n.id, x0 + off, y, v0 + rel_v, 0.0, false, n.lane));
      }
    }
    if (closing) d.collision_events.push_back({traj, frames_per_trajectory - 1});
  };
  for (int i = 0; i < safe_trajectories; ++i) run("safe_" + std::to_string(i), false);
  if (unsafe_trajectory) run("unsafe_0", true);
  d.source_labels = d.collision_events;
  return d;
}

// Volume of the convex hull of points in general position in R^3: every
// triple whose plane has all other points on one side is a facet; the hull
// is the fan of those facets from the centroid. O(n^4), for small clouds.
inline double brute_hull_volume_3d(const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  std::array<double, 3> c{0, 0, 0};
  for (const auto& q : p)
    for (int k = 0; k < 3; ++k) c[k] += q[k] / static_cast<double>(n);
  auto sub = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::array<double, 3>{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
  };
  auto det3 = [](const std::array<double, 3>& a, const std::array<double, 3>& b, const std::array<double, 3>& e) {
    return a[0] * (b[1] * e[2] - b[2] * e[1]) - a[1] * (b[0] * e[2] - b[2] * e[0]) + a[2] * (b[0] * e[1] - b[1] * e[0]);
  };
  const std::vector<double> cv{c[0], c[1], c[2]};
  double vol = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const auto a = sub(p[j], p[i]);
        const auto b = sub(p[k], p[i]);
        int pos = 0, neg = 0;
        for (std::size_t m = 0; m < n && !(pos && neg); ++m) {
          if (m == i || m == j || m == k) continue;
          const double s = det3(a, b, sub(p[m], p[i]));
          if (s > 0) ++pos;
          if (s < 0) ++neg;
        }
        if (pos && neg) continue;
        vol += std::fabs(det3(sub(p[i], cv), sub(p[j], cv), sub(p[k], cv))) / 6.0;
      }
  return vol;
}

// Every top simplex has a circumsphere with no input point strictly inside
// (relative slack `tol`).
inline bool empty_circumspheres(const safeset::geometry::SimplicialComplex& c, double tol = 1e-9) {
  const int n = c.dimension;
  for (const auto& s : c.top()) {
    std::vector<const double*> v;
    for (int i : s.vertices) v.push_back(c.points[static_cast<std::size_t>(i)].data());
    std::vector<double> center;
    double r = 0.0;
    if (!safeset::geometry::circumsphere(v, n, center, r)) return false;
    for (const auto& q : c.points) {
      double d2 = 0.0;
      for (int k = 0; k < n; ++k) d2 += (q[k] - center[k]) * (q[k] - center[k]);
      if (std::sqrt(d2) < r * (1.0 - tol) - tol) return false;
    }
  }
  return true;
}

}  // namespace fixtures
