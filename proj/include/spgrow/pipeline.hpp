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
#include <optional>
#include <string>
#include <vector>

#include "spgrow/affinity.hpp"
#include "spgrow/eval.hpp"
#include "spgrow/geometry.hpp"
#include "spgrow/openvocab.hpp"
#include "spgrow/oversegment.hpp"
#include "spgrow/regiongrow.hpp"
#include "spgrow/synth.hpp"

namespace spgrow {

// Everything read from a scene directory.
struct Scene {
  PointCloud cloud;
  std::vector<CameraView> views;       // ascending frame id
  std::vector<LabelImage> semantic;    // empty, or one per view
  LabelTable labels;
  std::optional<SuperpointPartition> segs;
  std::vector<std::int64_t> gt;        // empty when absent
};

// Uses the first ceil(views_fraction * M) frames in frame-id order.
Scene load_scene(const std::string& root, double views_fraction = 1.0);
Scene scene_from_bundle(const SynthBundle& bundle, double views_fraction = 1.0);
std::size_t views_used(std::size_t total, double views_fraction);

struct PipelineConfig {
  double depth_tolerance = kDefaultDepthTolerance;
  int normal_knn = 10;  // only for clouds without normals
  FelzenszwalbParams felzenszwalb;
  double adjacency_radius = 0.05;
  double w_min = 0.0;
  GrowthConfig growth;
  int min_points = 0;  // regions below this become unlabeled (0)
  bool use_segs = true;
  bool point_level = false;  // singleton superpoints on a k-NN graph
  int point_knn = 6;

  void validate() const;
};

struct Oversegmentation {
  SuperpointPartition partition;
  AdjacencyGraph adjacency;
};

// Normals are estimated (oriented toward the mean camera center) when the
// cloud has none.
PointCloud cloud_with_normals(const Scene& scene, const PipelineConfig& config);

Oversegmentation oversegment_scene(const Scene& scene, const PipelineConfig& config);
AdjacencyGraph partition_adjacency(const PointCloud& cloud, const SuperpointPartition& partition,
                                   const PipelineConfig& config);

AffinityMatrix scene_affinity(const Scene& scene, const Oversegmentation& over,
                              const PipelineConfig& config,
                              std::vector<std::string>* empty_frames = nullptr);

struct Instances {
  RegionLabeling regions;                  // over superpoints
  std::vector<std::int64_t> point_ids;     // 0 = unlabeled
  std::map<std::int64_t, double> confidence;
  std::map<std::int64_t, std::int64_t> sizes;
};

Instances grow_instances(const Oversegmentation& over, const AffinityMatrix& matrix,
                         const PipelineConfig& config);

struct PipelineResult {
  Oversegmentation over;
  AffinityMatrix affinity;
  Instances instances;
  std::vector<std::string> empty_frames;
  std::optional<APReport> report;  // when ground truth is present
};

PipelineResult run_pipeline(const Scene& scene, const PipelineConfig& config);

// instances.txt (one id per point), instances.json {id: [[begin, end), ...]},
// regions.json {id: {confidence, size}}.
void write_instances(const std::string& dir, const Instances& instances);
nlohmann::json instances_to_json(std::span<const std::int64_t> point_ids);
nlohmann::json regions_to_json(const Instances& instances);
void write_colored_ply(const std::string& path, const PointCloud& cloud,
                       std::span<const std::int64_t> point_ids);

// Table 5 rows: point-level growing, superpoints, + multi-level,
// + progressive, full method.
struct AblationVariant {
  std::string name;
  bool point_level = false;
  MergeCriterion criterion = MergeCriterion::kPairwise;
  bool progressive = false;
};
std::vector<AblationVariant> ablation_variants();
// Single-stage variants use `fixed_threshold`; progressive ones keep the
// schedule of `base`.
PipelineConfig variant_config(const PipelineConfig& base, const AblationVariant& variant,
                              double fixed_threshold);
// One report per variant, in ablation_variants() order. Scenes need ground
// truth.
std::vector<APReport> ablate_scene(const Scene& scene, const PipelineConfig& base,
                                   double fixed_threshold);

// Seeded benchmark suite: scene i uses random_scene_spec(seed * 1000 + i, ...).
std::vector<SceneSpec> benchmark_specs(std::uint64_t seed, int num_scenes, int num_objects,
                                       int num_views);

}  // namespace spgrow
