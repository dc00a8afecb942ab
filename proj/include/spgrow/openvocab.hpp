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

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spgrow/geometry.hpp"

namespace spgrow {

inline constexpr double kDefaultVoteRadius = 0.02;

// Label id -> text name, shared by all frames of a scene.
using LabelTable = std::map<std::int32_t, std::string>;

LabelTable read_label_table(const std::string& path);
void write_label_table(const std::string& path, const LabelTable& table);

struct SemanticFrame {
  const CameraView* view = nullptr;  // intrinsics, pose and depth
  LabelImage labels;                 // 0 = unlabeled
};

// Every labeled pixel with valid depth is lifted to 3D and votes for the
// nearest cloud point within `radius`. Per-point label is the majority vote,
// ties to the lower label id; 0 where no vote landed.
std::vector<std::int32_t> backproject_semantics(std::span<const SemanticFrame> frames,
                                                const PointCloud& cloud,
                                                double radius = kDefaultVoteRadius);

struct QueryResult {
  std::string query;
  std::vector<std::pair<std::int64_t, double>> instances;  // (id, overlap), descending
};

// Instances whose fraction of points labeled with `query` exceeds the
// threshold. Unknown queries give an empty result.
QueryResult query_instances(std::span<const std::int64_t> point_instances,
                            std::span<const std::int32_t> point_labels,
                            const LabelTable& table, const std::string& query,
                            double threshold = 0.5);

nlohmann::json query_to_json(const QueryResult& result);

}  // namespace spgrow
