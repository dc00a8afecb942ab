// Copyright 2026 The spgrow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "spgrow/common.hpp"

namespace spgrow {

// Static 3D kd-tree. Query results are ordered by (distance, index), so ties
// resolve deterministically.
class KdTree {
 public:
  explicit KdTree(Eigen::Matrix3Xd points);

  Index size() const { return static_cast<Index>(points_.cols()); }
  const Eigen::Matrix3Xd& points() const { return points_; }

  // k nearest points to q, optionally skipping one index (the query itself).
  std::vector<Index> knn(const Eigen::Vector3d& q, int k, Index exclude = -1) const;

  std::optional<Index> nearest(const Eigen::Vector3d& q, double max_radius) const;

 private:
  struct Node {
    Index begin = 0, end = 0;  // range in order_
    Index left = -1, right = -1;
    int axis = -1;             // -1 for leaves
    double split = 0;
  };

  Index build(Index begin, Index end, int depth);

  Eigen::Matrix3Xd points_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
};

}  // namespace spgrow
