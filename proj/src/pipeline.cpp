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

#include "spgrow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "spgrow/io.hpp"
#include "spgrow/masks2d.hpp"

namespace spgrow {

namespace fs = std::filesystem;

std::size_t views_used(std::size_t total, double views_fraction) {
  require(views_fraction > 0 && views_fraction <= 1, "views fraction must lie in (0, 1]");
  if (total == 0) return 0;
  const auto n = static_cast<std::size_t>(std::ceil(views_fraction * static_cast<double>(total) - 1e-9));
  return std::clamp<std::size_t>(n, 1, total);
}

namespace {

void require_file(const fs::path& p) {
  require(fs::is_regular_file(p), "missing file: " + p.string());
}

}  // namespace

Scene load_scene(const std::string& root, double views_fraction) {
  const fs::path base(root);
  require(fs::is_directory(base), "scene directory not found: " + root);
  Scene scene;
  require_file(base / "cloud.ply");
  scene.cloud = read_ply((base / "cloud.ply").string());
  require_file(base / "intrinsics.txt");
  const Intrinsics k = read_intrinsics((base / "intrinsics.txt").string());

  for (const char* sub : {"poses", "depth", "masks"})
    require(fs::is_directory(base / sub), "missing directory: " + (base / sub).string());
  std::vector<std::string> frames;
  for (const auto& entry : fs::directory_iterator(base / "poses"))
    if (entry.path().extension() == ".txt") frames.push_back(entry.path().stem().string());
  std::sort(frames.begin(), frames.end());
  require(!frames.empty(), "no poses in " + (base / "poses").string());
  frames.resize(views_used(frames.size(), views_fraction));

  const bool has_semantic = fs::is_directory(base / "semantic");
  if (has_semantic) {
    require_file(base / "labels.json");
    scene.labels = read_label_table((base / "labels.json").string());
  }

  for (const auto& id : frames) {
    CameraView view;
    view.frame_id = id;
    view.intrinsics = k;
    view.world_to_camera =
        world_to_camera_from_pose(read_matrix4((base / "poses" / (id + ".txt")).string()));
    const fs::path depth = base / "depth" / (id + ".png");
    require_file(depth);
    view.depth = read_depth_png(depth.string());
    const fs::path mask_png = base / "masks" / (id + ".png");
    const fs::path mask_dir = base / "masks" / id;
    if (fs::is_regular_file(mask_png)) {
      view.masks = load_mask_image(mask_png.string());
    } else if (fs::is_directory(mask_dir)) {
      view.masks = resolve_overlaps(load_binary_masks(mask_dir.string()));
    } else {
      throw InputError("missing masks for frame " + id + ": expected " + mask_png.string() +
                       " or " + mask_dir.string() + "/");
    }
    require(view.depth.cols() == k.width && view.depth.rows() == k.height,
            "depth size does not match intrinsics: " + depth.string());
    require(view.masks.width() == k.width && view.masks.height() == k.height,
            "mask size does not match intrinsics for frame " + id);
    view.validate();
    if (has_semantic) {
      const fs::path sem = base / "semantic" / (id + ".png");
      require_file(sem);
      LabelImage labels = read_png_gray(sem.string(), false).cast<std::int32_t>();
      require(labels.cols() == k.width && labels.rows() == k.height,
              "semantic size does not match intrinsics: " + sem.string());
      scene.semantic.push_back(std::move(labels));
    }
    scene.views.push_back(std::move(view));
  }

  if (fs::exists(base / "segs.json"))
    scene.segs = read_segs_json((base / "segs.json").string(), scene.cloud.size());
  if (fs::exists(base / "gt_instances.txt")) {
    scene.gt = read_id_list((base / "gt_instances.txt").string());
    require(static_cast<Index>(scene.gt.size()) == scene.cloud.size(),
            "gt_instances.txt has " + std::to_string(scene.gt.size()) + " entries for " +
                std::to_string(scene.cloud.size()) + " points");
  }
  return scene;
}

Scene scene_from_bundle(const SynthBundle& bundle, double views_fraction) {
  Scene scene;
  scene.cloud = bundle.cloud;
  const std::size_t m = views_used(bundle.views.size(), views_fraction);
  scene.views.assign(bundle.views.begin(), bundle.views.begin() + static_cast<std::ptrdiff_t>(m));
  scene.semantic.assign(bundle.semantic.begin(),
                        bundle.semantic.begin() + static_cast<std::ptrdiff_t>(m));
  scene.labels = bundle.labels;
  scene.gt = bundle.gt;
  return scene;
}

void PipelineConfig::validate() const {
  require(depth_tolerance > 0, "depth tolerance must be positive");
  require(normal_knn >= 3, "normal knn must be at least 3");
  require(felzenszwalb.knn >= 1, "segmentation knn must be at least 1");
  require(felzenszwalb.threshold_scale >= 0, "segmentation scale must be non-negative");
  require(felzenszwalb.min_size >= 1, "segmentation min size must be at least 1");
  require(adjacency_radius > 0, "adjacency radius must be positive");
  require(w_min >= 0, "w_min must be non-negative");
  require(min_points >= 0, "min_points must be non-negative");
  require(point_knn >= 1, "point knn must be at least 1");
  growth.validate();
}

PointCloud cloud_with_normals(const Scene& scene, const PipelineConfig& config) {
  if (scene.cloud.has_normals()) return scene.cloud;
  std::optional<Eigen::Vector3d> viewpoint;
  if (!scene.views.empty()) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& v : scene.views) c += v.center();
    viewpoint = c / static_cast<double>(scene.views.size());
  }
  return estimate_normals(scene.cloud, config.normal_knn, viewpoint);
}

AdjacencyGraph partition_adjacency(const PointCloud& cloud, const SuperpointPartition& partition,
                                   const PipelineConfig& config) {
  if (config.point_level) return knn_adjacency(cloud, config.point_knn);
  return superpoint_adjacency(cloud, partition, config.adjacency_radius);
}

Oversegmentation oversegment_scene(const Scene& scene, const PipelineConfig& config) {
  config.validate();
  Oversegmentation over;
  if (config.point_level) {
    over.partition = singleton_partition(scene.cloud.size());
  } else if (config.use_segs && scene.segs) {
    over.partition = *scene.segs;
  } else {
    over.partition = felzenszwalb_segment(cloud_with_normals(scene, config), config.felzenszwalb);
  }
  over.adjacency = partition_adjacency(scene.cloud, over.partition, config);
  return over;
}

AffinityMatrix scene_affinity(const Scene& scene, const Oversegmentation& over,
                              const PipelineConfig& config,
                              std::vector<std::string>* empty_frames) {
  AffinityOptions options;
  options.depth_tolerance = config.depth_tolerance;
  options.w_min = config.w_min;
  return build_affinity_matrix(scene.cloud, over.partition, over.adjacency, scene.views, options,
                               empty_frames);
}

Instances grow_instances(const Oversegmentation& over, const AffinityMatrix& matrix,
                         const PipelineConfig& config) {
  config.validate();
  const GrowthGraph graph = GrowthGraph::from_matrix(over.partition, over.adjacency, matrix);
  Instances out;
  out.regions = progressive_grow(graph, config.growth);
  const auto conf = region_confidence(out.regions, matrix);

  // Regions keep their ids unless the size filter drops some; survivors are
  // renumbered densely in id order.
  std::vector<std::int64_t> final_id(static_cast<std::size_t>(out.regions.num_regions()) + 1, 0);
  std::int64_t next = 0;
  for (Index r = 1; r <= out.regions.num_regions(); ++r) {
    const double size = out.regions.sizes[r - 1];
    if (size < config.min_points) continue;
    final_id[r] = ++next;
    out.confidence[next] = conf.at(r);
    out.sizes[next] = static_cast<std::int64_t>(size);
  }
  const auto& part = over.partition;
  out.point_ids.resize(static_cast<std::size_t>(part.num_points()));
  for (Index p = 0; p < part.num_points(); ++p)
    out.point_ids[p] = final_id[out.regions.instance_id[part.label[p]]];
  return out;
}

PipelineResult run_pipeline(const Scene& scene, const PipelineConfig& config) {
  config.validate();
  PipelineResult result;
  result.over = oversegment_scene(scene, config);
  result.affinity = scene_affinity(scene, result.over, config, &result.empty_frames);
  result.instances = grow_instances(result.over, result.affinity, config);
  if (!scene.gt.empty())
    result.report = evaluate_instances(result.instances.point_ids, result.instances.confidence,
                                       scene.gt);
  return result;
}

nlohmann::json instances_to_json(std::span<const std::int64_t> point_ids) {
  std::map<std::int64_t, nlohmann::json> ranges;
  std::size_t p = 0;
  while (p < point_ids.size()) {
    std::size_t q = p;
    while (q < point_ids.size() && point_ids[q] == point_ids[p]) ++q;
    if (point_ids[p] != 0) {
      auto& list = ranges[point_ids[p]];
      if (list.is_null()) list = nlohmann::json::array();
      list.push_back({p, q});
    }
    p = q;
  }
  nlohmann::json out = nlohmann::json::object();
  for (auto& [id, list] : ranges) out[std::to_string(id)] = std::move(list);
  return out;
}

nlohmann::json regions_to_json(const Instances& instances) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [id, c] : instances.confidence)
    out[std::to_string(id)] = {{"confidence", c}, {"size", instances.sizes.at(id)}};
  return out;
}

void write_instances(const std::string& dir, const Instances& instances) {
  fs::create_directories(dir);
  write_id_list((fs::path(dir) / "instances.txt").string(), instances.point_ids);
  std::ofstream inst(fs::path(dir) / "instances.json");
  inst << instances_to_json(instances.point_ids).dump() << "\n";
  std::ofstream reg(fs::path(dir) / "regions.json");
  reg << regions_to_json(instances).dump(2) << "\n";
  require(inst.good() && reg.good(), "cannot write outputs in " + dir);
}

void write_colored_ply(const std::string& path, const PointCloud& cloud,
                       std::span<const std::int64_t> point_ids) {
  PointCloud out = cloud;
  out.colors.resize(3, cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) {
    const auto id = static_cast<std::uint64_t>(point_ids[i]);
    if (id == 0) {
      out.colors.col(i).setConstant(40);
      continue;
    }
    const std::uint64_t h = id * 0x9E3779B97F4A7C15ull;
    out.colors.col(i) << static_cast<std::uint8_t>(64 + (h >> 56) % 192),
        static_cast<std::uint8_t>(64 + (h >> 48) % 192),
        static_cast<std::uint8_t>(64 + (h >> 40) % 192);
  }
  write_ply(path, out);
}

std::vector<AblationVariant> ablation_variants() {
  return {
      {"point-level", true, MergeCriterion::kPairwise, false},
      {"superpoints", false, MergeCriterion::kPairwise, false},
      {"superpoints + multi-level", false, MergeCriterion::kMultiLevel, false},
      {"superpoints + progressive", false, MergeCriterion::kPairwise, true},
      {"full", false, MergeCriterion::kMultiLevel, true},
  };
}

PipelineConfig variant_config(const PipelineConfig& base, const AblationVariant& variant,
                              double fixed_threshold) {
  PipelineConfig c = base;
  c.point_level = variant.point_level;
  c.growth.criterion = variant.criterion;
  if (!variant.progressive) c.growth.thresholds = {fixed_threshold};
  return c;
}

std::vector<APReport> ablate_scene(const Scene& scene, const PipelineConfig& base,
                                   double fixed_threshold) {
  require(!scene.gt.empty(), "ablation needs gt_instances.txt");
  std::vector<APReport> reports;
  std::optional<std::pair<Oversegmentation, AffinityMatrix>> superpoints;
  for (const auto& variant : ablation_variants()) {
    const PipelineConfig config = variant_config(base, variant, fixed_threshold);
    Instances inst;
    if (variant.point_level) {
      const auto over = oversegment_scene(scene, config);
      inst = grow_instances(over, scene_affinity(scene, over, config), config);
    } else {
      if (!superpoints) {
        auto over = oversegment_scene(scene, config);
        auto matrix = scene_affinity(scene, over, config);
        superpoints.emplace(std::move(over), std::move(matrix));
      }
      inst = grow_instances(superpoints->first, superpoints->second, config);
    }
    reports.push_back(evaluate_instances(inst.point_ids, inst.confidence, scene.gt));
  }
  return reports;
}

std::vector<SceneSpec> benchmark_specs(std::uint64_t seed, int num_scenes, int num_objects,
                                       int num_views) {
  std::vector<SceneSpec> specs;
  for (int i = 0; i < num_scenes; ++i)
    specs.push_back(random_scene_spec(seed * 1000 + static_cast<std::uint64_t>(i), num_objects,
                                      num_views));
  return specs;
}

}  // namespace spgrow
