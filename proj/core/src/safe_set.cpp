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
#include "safeset/safe_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "safeset/error.hpp"

namespace safeset::safe {

std::string to_string(ReachMode mode) {
  switch (mode) {
    case ReachMode::Undirected: return "undirected";
    case ReachMode::Ancestors: return "ancestors";
    case ReachMode::Descendants: return "descendants";
  }
  return "undirected";
}

ReachMode reach_mode_from_string(const std::string& text) {
  if (text == "undirected") return ReachMode::Undirected;
  if (text == "ancestors") return ReachMode::Ancestors;
  if (text == "descendants") return ReachMode::Descendants;
  throw Error(ErrorCode::InvalidConfig, "unknown reach mode '" + text + "'");
}

std::size_t VectorHash::operator()(const std::vector<double>& v) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::vector<double> SafeGraph::canonical(const std::vector<double>& values) {
  std::vector<double> c = values;
  for (double& d : c) {
    if (d == 0.0) d = 0.0;
  }
  return c;
}

int SafeGraph::add_vertex(const std::vector<double>& values) {
  auto key = canonical(values);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(vertices_.size());
  index_.emplace(key, id);
  vertices_.push_back(std::move(key));
  out_.emplace_back();
  in_.emplace_back();
  alive_.push_back(1);
  return id;
}

void SafeGraph::add_edge(int from, int to) {
  if (has_edge(from, to)) return;
  out_[static_cast<std::size_t>(from)].push_back(to);
  in_[static_cast<std::size_t>(to)].push_back(from);
}

bool SafeGraph::has_edge(int from, int to) const {
  const auto& o = out_[static_cast<std::size_t>(from)];
  return std::find(o.begin(), o.end(), to) != o.end();
}

int SafeGraph::find(const std::vector<double>& values) const {
  auto it = index_.find(canonical(values));
  return it == index_.end() ? -1 : it->second;
}

std::size_t SafeGraph::edge_count() const {
  std::size_t n = 0;
  for (std::size_t v = 0; v < out_.size(); ++v) {
    if (!alive_[v]) continue;
    for (int w : out_[v]) n += alive_[static_cast<std::size_t>(w)] ? 1 : 0;
  }
  return n;
}

std::size_t SafeGraph::alive_count() const {
  return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), char{1}));
}

void SafeGraph::remove(const std::vector<int>& ids) {
  for (int id : ids) alive_[static_cast<std::size_t>(id)] = 0;
}

std::vector<int> SafeGraph::seeds(const std::vector<double>& query, double radius) const {
  std::vector<int> out;
  if (radius <= 0.0) {
    const int id = find(query);
    if (id >= 0 && alive(id)) out.push_back(id);
    return out;
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    if (!alive_[v] || vertices_[v].size() != query.size()) continue;
    bool near = true;
    for (std::size_t k = 0; k < query.size() && near; ++k) near = std::fabs(vertices_[v][k] - query[k]) <= radius;
    if (near) out.push_back(static_cast<int>(v));
  }
  return out;
}

Partition classify_trajectories(const std::vector<oss::StateTrajectory>& ts) {
  Partition p;
  for (const auto& t : ts) {
    const bool bad = std::any_of(t.states.begin(), t.states.end(), [](const oss::OssState& s) { return s.unsafe; });
    (bad ? p.unsafe : p.safe).push_back(t);
  }
  return p;
}

SafeGraph build_safe_graph(const std::vector<oss::StateTrajectory>& safe) {
  SafeGraph g;
  for (const auto& t : safe) {
    int prev = -1;
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      const int id = g.add_vertex(t.states[i].values);
      const bool linked = i > 0 && i - 1 < t.gap_free.size() && t.gap_free[i - 1];
      if (linked) g.add_edge(prev, id);
      prev = id;
    }
  }
  return g;
}

std::vector<int> reachable(const std::vector<double>& state, const SafeGraph& g, ReachMode mode,
                           double match_radius) {
  std::vector<int> stack = g.seeds(state, match_radius);
  std::vector<char> seen(g.vertex_count(), 0);
  for (int s : stack) seen[static_cast<std::size_t>(s)] = 1;
  std::vector<int> result;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    result.push_back(v);
    auto visit = [&](const std::vector<int>& next) {
      for (int w : next) {
        if (!seen[static_cast<std::size_t>(w)] && g.alive(w)) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    };
    if (mode != ReachMode::Ancestors) visit(g.successors(v));
    if (mode != ReachMode::Descendants) visit(g.predecessors(v));
  }
  std::sort(result.begin(), result.end());
  return result;
}

SafeStates extract_safe_states(const std::vector<oss::StateTrajectory>& ts, ReachMode mode, double match_radius) {
  const Partition part = classify_trajectories(ts);
  SafeStates out;
  out.graph = build_safe_graph(part.safe);

  std::vector<char> doomed(out.graph.vertex_count(), 0);
  for (const auto& t : part.unsafe) {
    for (const auto& s : t.states) {
      for (int v : reachable(s.values, out.graph, mode, match_radius)) doomed[static_cast<std::size_t>(v)] = 1;
    }
  }
  std::vector<int> removal;
  for (std::size_t v = 0; v < doomed.size(); ++v) {
    if (doomed[v]) removal.push_back(static_cast<int>(v));
  }
  out.graph.remove(removal);
  out.removed = removal.size();
  for (std::size_t v = 0; v < out.graph.vertex_count(); ++v) {
    if (out.graph.alive(static_cast<int>(v))) out.states.push_back(out.graph.vertex(static_cast<int>(v)));
  }
  return out;
}

TransitionPartition partition_transitions(const oss::TransitionSet& td,
                                          const std::vector<std::vector<double>>& safe_states) {
  std::unordered_set<std::vector<double>, VectorHash> members;
  for (auto s : safe_states) {
    for (double& d : s) {
      if (d == 0.0) d = 0.0;
    }
    members.insert(std::move(s));
  }
  auto in_ds = [&](std::vector<double> v) {
    for (double& d : v) {
      if (d == 0.0) d = 0.0;
    }
    return members.count(v) > 0;
  };
  TransitionPartition out;
  for (const auto& pr : td.pairs) {
    ((in_ds(pr.from.values) && in_ds(pr.to.values)) ? out.safe : out.rest).pairs.push_back(pr);
  }
  out.safe.safe_count = static_cast<std::int64_t>(out.safe.pairs.size());
  out.rest.unsafe_count = static_cast<std::int64_t>(out.rest.pairs.size());
  return out;
}

}  // namespace safeset::safe
