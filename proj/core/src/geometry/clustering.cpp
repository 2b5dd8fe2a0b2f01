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
#include "safeset/geometry/clustering.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "safeset/error.hpp"
#include "safeset/geometry/mc_volume.hpp"

namespace safeset::geometry {

namespace {

double dist2(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

}  // namespace

std::vector<int> two_means(const std::vector<Point>& points, const std::vector<int>& subset, std::uint64_t seed) {
  std::vector<int> label(subset.size(), 0);
  if (subset.size() < 2) return label;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, subset.size() - 1);
  Point c0 = points[static_cast<std::size_t>(subset[pick(rng)])];
  std::vector<double> w(subset.size());
  double total = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    w[i] = dist2(points[static_cast<std::size_t>(subset[i])], c0);
    total += w[i];
  }
  if (!(total > 0.0)) return label;
  std::uniform_real_distribution<double> u(0.0, total);
  double target = u(rng);
  std::size_t second = subset.size() - 1;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    target -= w[i];
    if (target <= 0.0 && w[i] > 0.0) {
      second = i;
      break;
    }
  }
  Point c1 = points[static_cast<std::size_t>(subset[second])];
  const std::size_t n = c0.size();
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      const Point& p = points[static_cast<std::size_t>(subset[i])];
      const int l = dist2(p, c1) < dist2(p, c0) ? 1 : 0;
      changed = changed || l != label[i];
      label[i] = l;
    }
    Point s0(n, 0.0), s1(n, 0.0);
    std::size_t k0 = 0, k1 = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      const Point& p = points[static_cast<std::size_t>(subset[i])];
      Point& s = label[i] ? s1 : s0;
      for (std::size_t d = 0; d < n; ++d) s[d] += p[d];
      (label[i] ? k1 : k0)++;
    }
    if (k0 == 0 || k1 == 0) break;
    for (std::size_t d = 0; d < n; ++d) {
      c0[d] = s0[d] / static_cast<double>(k0);
      c1[d] = s1[d] / static_cast<double>(k1);
    }
    if (!changed && iter > 0) break;
  }
  return label;
}

ClusterTree cluster_tree(const std::vector<Point>& points, std::size_t max_cluster_size, std::uint64_t seed) {
  if (max_cluster_size < 1) throw Error(ErrorCode::InvalidConfig, "cluster size limit must be positive");
  ClusterTree tree;
  ClusterNode root;
  root.members.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) root.members[i] = static_cast<int>(i);
  tree.nodes.push_back(std::move(root));

  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (tree.nodes[static_cast<std::size_t>(id)].members.size() <= max_cluster_size) continue;
    const std::vector<int> members = tree.nodes[static_cast<std::size_t>(id)].members;
    const auto label = two_means(points, members, mix_seed(seed + static_cast<std::uint64_t>(id)));
    ClusterNode a, b;
    for (std::size_t i = 0; i < members.size(); ++i) (label[i] ? b : a).members.push_back(members[i]);
    bool forced = false;
    if (a.members.empty() || b.members.empty()) {
      forced = true;
      const auto half = static_cast<std::ptrdiff_t>(members.size() / 2);
      a.members.assign(members.begin(), members.begin() + half);
      b.members.assign(members.begin() + half, members.end());
    }
    const int ia = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(a));
    tree.nodes.push_back(std::move(b));
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.left = ia;
    node.right = ia + 1;
    node.forced_split = forced;
    stack.push_back(ia + 1);
    stack.push_back(ia);
  }
  // leaves in left-to-right order
  std::vector<int> walk{0};
  while (!walk.empty()) {
    const int id = walk.back();
    walk.pop_back();
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      tree.leaves.push_back(id);
    } else {
      walk.push_back(node.right);
      walk.push_back(node.left);
    }
  }
  return tree;
}

std::string ClusterTree::describe() const {
  std::ostringstream os;
  auto rec = [&](auto&& self, int id) -> void {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      os << node.members.size();
      return;
    }
    os << (node.forced_split ? "[" : "(");
    self(self, node.left);
    os << ",";
    self(self, node.right);
    os << (node.forced_split ? "]" : ")");
  };
  if (!nodes.empty()) rec(rec, 0);
  return os.str();
}

std::vector<std::vector<Point>> hierarchical_cluster(const std::vector<Point>& points, std::size_t max_cluster_size,
                                                     std::uint64_t seed) {
  const ClusterTree tree = cluster_tree(points, max_cluster_size, seed);
  std::vector<std::vector<Point>> out;
  for (int leaf : tree.leaves) {
    std::vector<Point> group;
    for (int i : tree.nodes[static_cast<std::size_t>(leaf)].members) group.push_back(points[static_cast<std::size_t>(i)]);
    out.push_back(std::move(group));
  }
  return out;
}

}  // namespace safeset::geometry
