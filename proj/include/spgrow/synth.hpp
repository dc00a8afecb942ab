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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spgrow/geometry.hpp"
#include "spgrow/masks2d.hpp"
#include "spgrow/openvocab.hpp"

namespace spgrow {

enum class ShapeKind { kBox, kSphere, kCylinder };

struct SceneObject {
  ShapeKind shape = ShapeKind::kBox;
  std::string name;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  // box: full extents; sphere: (radius, -, -); cylinder: (radius, -, height)
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  double yaw = 0.0;  // boxes only, radians about +z

  double z_min() const;
  double footprint_radius() const;
  bool contains(const Eigen::Vector3d& p) const;
  // Ray parameter of the first hit with t > t_min along origin + t * dir.
  std::optional<double> intersect(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                  double t_min = 1e-9) const;
};

struct CameraOrbit {
  int count = 24;
  double radius = 2.6;
  double height = 1.6;
  Eigen::Vector3d look_at{0.0, 0.0, 0.2};
};

struct SceneSpec {
  std::uint64_t seed = 1;
  double floor_extent = 4.0;  // square side, centered at the origin, z = 0
  std::vector<SceneObject> objects;
  double density = 1000.0;  // points per square meter
  CameraOrbit orbit;
  Intrinsics intrinsics{260.0, 260.0, 160.0, 120.0, 320, 240};

  void validate() const;
  // Instance id of the floor is 1, object k gets k + 2.
  static constexpr std::int32_t kFloorId = 1;
};

// Flat "key = value" file: seed, floor_extent, density, camera_count,
// camera_radius, camera_height, look_at, width, height, fx, fy, cx, cy, and
// repeated "object = box|sphere|cylinder <name> cx cy cz <dims...> [yaw]".
SceneSpec read_scene_spec(const std::string& path);
std::string format_scene_spec(const SceneSpec& spec);

// Random non-overlapping objects resting on the floor, at least
// `min_gap` apart.
SceneSpec random_scene_spec(std::uint64_t seed, int num_objects, int num_views,
                            double min_gap = 0.15);

struct SynthScene {
  PointCloud cloud;               // analytic normals
  std::vector<std::int32_t> gt;   // per point: 1 = floor, k + 2 = object k
};

// Jittered-grid sampling of every exposed surface at spec.density.
// Surfaces resting on the floor are not sampled, nor is floor inside an
// object footprint.
SynthScene generate_scene(const SceneSpec& spec);

// First hit along a ray: (t, instance id). Camera-space depth equals t when
// the ray direction has unit camera z.
std::optional<std::pair<double, std::int32_t>> ray_cast(const SceneSpec& spec,
                                                        const Eigen::Vector3d& origin,
                                                        const Eigen::Vector3d& dir);

// Camera-to-world pose of orbit camera `index`.
Eigen::Matrix4d orbit_pose(const CameraOrbit& orbit, int index);

// Exact ray-cast depth and first-hit instance labels (instance ids, not
// densified) for every orbit camera. Frame ids are zero-padded indices.
std::vector<CameraView> render_views(const SceneSpec& spec);

struct NoiseModel {
  double merge_prob = 0.0;
  double split_prob = 0.0;
  int erode_px = 0;
  std::uint64_t seed = 0;

  bool is_identity() const { return merge_prob == 0 && split_prob == 0 && erode_px == 0; }
  void validate() const;
};

// Per view, with an rng stream derived from (seed, view index): fuse
// 4-adjacent label pairs with merge_prob, cut labels along a random line
// through their centroid with split_prob, zero pixels within erode_px
// (Chebyshev) of a different label. Output labels are densified.
std::vector<MaskImage> corrupt_masks(std::span<const MaskImage> masks, const NoiseModel& model);

// Points visible (depth test at `tolerance`) in at least one view.
std::vector<std::uint8_t> observed_points(const PointCloud& cloud,
                                          std::span<const CameraView> views,
                                          double tolerance = kDefaultDepthTolerance);

LabelTable scene_label_table(const SceneSpec& spec);

// A scene as the pipeline sees it after a round trip through the scene
// directory: float positions, millimeter depth, densified (possibly
// corrupted) masks, and ground truth restricted to observed points.
struct SynthBundle {
  SceneSpec spec;
  PointCloud cloud;
  std::vector<CameraView> views;
  std::vector<LabelImage> semantic;      // per view, instance id labels
  std::vector<std::int64_t> gt;          // 0 for never-observed points
  std::vector<std::int32_t> object_ids;  // full per-point object ids
  LabelTable labels;
};

SynthBundle make_synth_bundle(const SceneSpec& spec, const NoiseModel& noise = {});

// Writes cloud.ply, intrinsics.txt, poses/, depth/, masks/, semantic/,
// labels.json, gt_instances.txt and scene.cfg.
void write_scene_directory(const std::string& root, const SynthBundle& bundle);

}  // namespace spgrow
