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
#include <string>
#include <vector>

#include "safeset/geometry/delaunay.hpp"

namespace safeset::geometry {

struct ClusterNode {
  std::vector<int> members;  // indices into the input
  int left = -1;
  int right = -1;
  bool forced_split = false;  // 2-means was degenerate, split by halves
};

struct ClusterTree {
  std::vector<ClusterNode> nodes;  // nodes[0] is the root
  std::vector<int> leaves;         // node ids, left to right
  std::string describe() const;
};

/// Recursive 2-means (k-means++ seeding, Lloyd iterations) until every leaf
/// holds at most max_cluster_size points. A split that leaves one side empty
/// falls back to an equal bipartition in input order.
ClusterTree cluster_tree(const std::vector<Point>& points, std::size_t max_cluster_size, std::uint64_t seed);

std::vector<std::vector<Point>> hierarchical_cluster(const std::vector<Point>& points, std::size_t max_cluster_size,
                                                     std::uint64_t seed);

/// Plain 2-means assignment (0/1 per point) used by the splitter.
std::vector<int> two_means(const std::vector<Point>& points, const std::vector<int>& subset, std::uint64_t seed);

}  // namespace safeset::geometry
