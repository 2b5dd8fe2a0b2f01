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

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "safeset/oss.hpp"

namespace safeset::safe {

enum class ReachMode { Undirected, Ancestors, Descendants };

std::string to_string(ReachMode mode);
ReachMode reach_mode_from_string(const std::string& text);

struct VectorHash {
  std::size_t operator()(const std::vector<double>& v) const noexcept;
};

/// Directed graph over distinct state vectors. Vertex identity is exact
/// value equality (with -0 folded into +0); tolerance only enters through the
/// match radius of `reachable`.
class SafeGraph {
 public:
  /// Returns the vertex id, inserting when new.
  int add_vertex(const std::vector<double>& values);
  void add_edge(int from, int to);

  /// -1 when absent.
  int find(const std::vector<double>& values) const;

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const;
  const std::vector<double>& vertex(int id) const { return vertices_[static_cast<std::size_t>(id)]; }
  const std::vector<int>& successors(int id) const { return out_[static_cast<std::size_t>(id)]; }
  const std::vector<int>& predecessors(int id) const { return in_[static_cast<std::size_t>(id)]; }
  bool has_edge(int from, int to) const;

  bool alive(int id) const { return alive_[static_cast<std::size_t>(id)] != 0; }
  std::size_t alive_count() const;
  void remove(const std::vector<int>& ids);

  /// Alive vertices within `radius` (infinity norm) of `query`.
  std::vector<int> seeds(const std::vector<double>& query, double radius) const;

 private:
  static std::vector<double> canonical(const std::vector<double>& values);

  std::vector<std::vector<double>> vertices_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<char> alive_;
  std::unordered_map<std::vector<double>, int, VectorHash> index_;
};

struct Partition {
  std::vector<oss::StateTrajectory> safe;
  std::vector<oss::StateTrajectory> unsafe;
};

/// A trajectory is unsafe when any of its states is.
Partition classify_trajectories(const std::vector<oss::StateTrajectory>& ts);

/// Vertices: every state of the safe trajectories. Edges: their gap-free
/// consecutive pairs.
SafeGraph build_safe_graph(const std::vector<oss::StateTrajectory>& safe);

/// Depth-first closure of the seed vertices matching `state` (within
/// `match_radius`, infinity norm), following edges as `mode` dictates. The
/// seeds themselves are part of the result. Only alive vertices are visited.
std::vector<int> reachable(const std::vector<double>& state, const SafeGraph& g, ReachMode mode,
                           double match_radius = 0.0);

struct SafeStates {
  std::vector<std::vector<double>> states;  // D_s, in vertex insertion order
  SafeGraph graph;                          // G_s after pruning
  std::size_t removed = 0;
};

/// Builds G_s from the safe trajectories, then removes everything reachable
/// from any state of an unsafe trajectory. Reachability is evaluated against
/// the unpruned graph and the removals applied as one union; for all three
/// modes this equals sequential removal.
SafeStates extract_safe_states(const std::vector<oss::StateTrajectory>& ts, ReachMode mode = ReachMode::Undirected,
                               double match_radius = 0.0);

struct TransitionPartition {
  oss::TransitionSet safe;  // both endpoints in D_s
  oss::TransitionSet rest;
};

TransitionPartition partition_transitions(const oss::TransitionSet& td,
                                          const std::vector<std::vector<double>>& safe_states);

}  // namespace safeset::safe
