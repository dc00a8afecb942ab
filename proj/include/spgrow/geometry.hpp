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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "spgrow/common.hpp"
#include "spgrow/masks2d.hpp"

namespace spgrow {

inline constexpr double kDefaultDepthTolerance = 0.05;

using DepthImage =
    Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PointCloud {
  Eigen::Matrix3Xd positions;
  Eigen::Matrix3Xd normals;  // 0 columns when absent
  Eigen::Matrix<std::uint8_t, 3, Eigen::Dynamic> colors;

  Index size() const { return static_cast<Index>(positions.cols()); }
  bool has_normals() const { return normals.cols() == positions.cols(); }
  bool has_colors() const { return colors.cols() == positions.cols(); }

  // Throws InputError unless N >= 1, coordinates are finite and normals,
  // when present, are unit length.
  void validate() const;
};

// Pinhole intrinsics. Pixel (c, r) covers [c, c+1) x [r, r+1), so the pixel
// nearest to a continuous coordinate is its floor.
template <typename Scalar>
struct PinholeIntrinsics {
  Scalar fx = 1, fy = 1, cx = 0, cy = 0;
  int width = 0, height = 0;

  template <typename Derived>
  Eigen::Matrix<Scalar, 2, 1> project(const Eigen::MatrixBase<Derived>& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }

  Eigen::Matrix<Scalar, 3, 1> unproject(Scalar u, Scalar v, Scalar depth) const {
    return {(u - cx) * depth / fx, (v - cy) * depth / fy, depth};
  }

  bool in_bounds(Scalar u, Scalar v) const {
    return u >= 0 && v >= 0 && u < width && v < height;
  }
};

using Intrinsics = PinholeIntrinsics<double>;

template <typename Scalar>
std::optional<std::pair<int, int>> nearest_pixel(const PinholeIntrinsics<Scalar>& k,
                                                 Scalar u, Scalar v) {
  if (!k.in_bounds(u, v)) return std::nullopt;
  return std::pair<int, int>{static_cast<int>(std::floor(u)),
                             static_cast<int>(std::floor(v))};
}

struct CameraView {
  std::string frame_id;
  Intrinsics intrinsics;
  Eigen::Isometry3d world_to_camera = Eigen::Isometry3d::Identity();
  DepthImage depth;  // meters, 0 = invalid
  MaskImage masks;

  int width() const { return intrinsics.width; }
  int height() const { return intrinsics.height; }
  Eigen::Vector3d center() const { return world_to_camera.inverse().translation(); }

  void validate() const;
};

// Camera-to-world 4x4 (as stored on disk) to a world-to-camera isometry.
// Rotations within 1e-3 of orthonormal are re-orthonormalized; anything
// further off is rejected.
Eigen::Isometry3d world_to_camera_from_pose(const Eigen::Matrix4d& camera_to_world);

struct Projection {
  Eigen::Matrix2Xd pixel;
  Eigen::VectorXd cam_depth;
  std::vector<std::uint8_t> visible;

  Index size() const { return static_cast<Index>(cam_depth.size()); }
};

// A point is visible iff it lands in bounds in front of the camera, its
// nearest depth pixel is valid and |z - depth| <= tolerance.
std::vector<std::uint8_t> visibility_test(const Projection& projection,
                                          const DepthImage& depth,
                                          double tolerance);

Projection project_points(const PointCloud& cloud, const CameraView& view,
                          double tolerance = kDefaultDepthTolerance);

// Fraction of the superpoint's points that are visible. Throws
// InvariantError on an empty superpoint.
double primitive_visibility(std::span<const Index> superpoint,
                            const Projection& projection);

// World position of continuous pixel (u, v) at camera depth z.
Eigen::Vector3d back_project(const CameraView& view, double u, double v, double z);

}  // namespace spgrow
