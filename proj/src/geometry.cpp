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

#include "spgrow/geometry.hpp"

#include <Eigen/SVD>

#include "spgrow/parallel.hpp"

namespace spgrow {

void PointCloud::validate() const {
  require(size() >= 1, "point cloud is empty");
  require(positions.allFinite(), "point cloud has non-finite coordinates");
  if (normals.cols() != 0) {
    require(has_normals(), "normal count does not match point count");
    for (Index i = 0; i < size(); ++i) {
      require(std::abs(normals.col(i).norm() - 1.0) <= 1e-6,
              "normal " + std::to_string(i) + " is not unit length");
    }
  }
  if (colors.cols() != 0) require(has_colors(), "color count does not match point count");
}

void CameraView::validate() const {
  const auto& k = intrinsics;
  require(k.fx > 0 && k.fy > 0, "frame " + frame_id + ": focal lengths must be positive");
  require(k.width > 0 && k.height > 0, "frame " + frame_id + ": empty image size");
  const Eigen::Matrix3d r = world_to_camera.linear();
  require((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9,
          "frame " + frame_id + ": pose rotation is not orthonormal");
  require(r.determinant() > 0, "frame " + frame_id + ": pose rotation is a reflection");
  if (depth.size() != 0) {
    require(depth.rows() == k.height && depth.cols() == k.width,
            "frame " + frame_id + ": depth size does not match intrinsics");
    require(depth.allFinite() && (depth >= 0).all(),
            "frame " + frame_id + ": depth has negative or non-finite values");
  }
  if (masks.labels.size() != 0) {
    require(masks.labels.rows() == k.height && masks.labels.cols() == k.width,
            "frame " + frame_id + ": mask size does not match depth");
  }
}

Eigen::Isometry3d world_to_camera_from_pose(const Eigen::Matrix4d& camera_to_world) {
  require(camera_to_world.allFinite(), "pose has non-finite entries");
  require(camera_to_world.row(3).isApprox(Eigen::RowVector4d(0, 0, 0, 1), 1e-9),
          "pose bottom row must be 0 0 0 1");
  Eigen::Matrix3d r = camera_to_world.topLeftCorner<3, 3>();
  const double drift = (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  require(drift <= 1e-3, "pose rotation is not orthonormal");
  if (drift > 1e-9) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    r = svd.matrixU() * svd.matrixV().transpose();
  }
  require(r.determinant() > 0, "pose rotation is a reflection");
  Eigen::Isometry3d c2w = Eigen::Isometry3d::Identity();
  c2w.linear() = r;
  c2w.translation() = camera_to_world.topRightCorner<3, 1>();
  return c2w.inverse();
}

std::vector<std::uint8_t> visibility_test(const Projection& projection,
                                          const DepthImage& depth,
                                          double tolerance) {
  const Index n = projection.size();
  std::vector<std::uint8_t> visible(static_cast<std::size_t>(n), 0);
  const double w = static_cast<double>(depth.cols());
  const double h = static_cast<double>(depth.rows());
  for (Index i = 0; i < n; ++i) {
    const double z = projection.cam_depth[i];
    const double u = projection.pixel(0, i);
    const double v = projection.pixel(1, i);
    if (!(z > 0) || !(u >= 0 && u < w && v >= 0 && v < h)) continue;
    const double d = depth(static_cast<Eigen::Index>(std::floor(v)),
                           static_cast<Eigen::Index>(std::floor(u)));
    if (d > 0 && std::abs(z - d) <= tolerance) visible[i] = 1;
  }
  return visible;
}

Projection project_points(const PointCloud& cloud, const CameraView& view,
                          double tolerance) {
  Projection out;
  const Eigen::Matrix3Xd cam = view.world_to_camera * cloud.positions;
  const auto& k = view.intrinsics;
  out.pixel.resize(2, cam.cols());
  out.pixel.row(0) = (k.fx * cam.row(0).array() / cam.row(2).array() + k.cx).matrix();
  out.pixel.row(1) = (k.fy * cam.row(1).array() / cam.row(2).array() + k.cy).matrix();
  out.cam_depth = cam.row(2).transpose();
  if (view.depth.size() != 0) {
    out.visible = visibility_test(out, view.depth, tolerance);
  } else {
    out.visible.assign(static_cast<std::size_t>(cam.cols()), 0);
    for (Index i = 0; i < out.size(); ++i) {
      out.visible[i] = out.cam_depth[i] > 0 && k.in_bounds(out.pixel(0, i), out.pixel(1, i));
    }
  }
  return out;
}

double primitive_visibility(std::span<const Index> superpoint,
                            const Projection& projection) {
  ensure(!superpoint.empty(), "degenerate partition: empty superpoint");
  std::size_t seen = 0;
  for (Index p : superpoint) seen += projection.visible[static_cast<std::size_t>(p)];
  return static_cast<double>(seen) / static_cast<double>(superpoint.size());
}

Eigen::Vector3d back_project(const CameraView& view, double u, double v, double z) {
  return view.world_to_camera.inverse() * view.intrinsics.unproject(u, v, z);
}

}  // namespace spgrow
