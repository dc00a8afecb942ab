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

#include "spgrow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "spgrow/io.hpp"
#include "spgrow/parallel.hpp"

namespace spgrow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Matrix3d yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

struct Sampler {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
  std::vector<std::int32_t> ids;
  std::mt19937_64& rng;
  double step;  // 1 / sqrt(density)

  void add(const Eigen::Vector3d& p, const Eigen::Vector3d& n, std::int32_t id) {
    points.push_back(p);
    normals.push_back(n);
    ids.push_back(id);
  }

  // Jittered grid over the parallelogram origin + s*u + t*v, s, t in [0, 1].
  template <typename Keep>
  void rect(const Eigen::Vector3d& origin, const Eigen::Vector3d& u, const Eigen::Vector3d& v,
            const Eigen::Vector3d& n, std::int32_t id, Keep&& keep) {
    const int nu = std::max(1, static_cast<int>(std::lround(u.norm() / step)));
    const int nv = std::max(1, static_cast<int>(std::lround(v.norm() / step)));
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        const double s = (i + uniform(rng)) / nu;
        const double t = (j + uniform(rng)) / nv;
        const Eigen::Vector3d p = origin + s * u + t * v;
        if (keep(p)) add(p, n, id);
      }
  }
};

}  // namespace

double SceneObject::z_min() const {
  switch (shape) {
    case ShapeKind::kBox: return center.z() - size.z() / 2;
    case ShapeKind::kSphere: return center.z() - size.x();
    case ShapeKind::kCylinder: return center.z() - size.z() / 2;
  }
  return center.z();
}

double SceneObject::footprint_radius() const {
  if (shape == ShapeKind::kBox) return 0.5 * std::hypot(size.x(), size.y());
  return size.x();
}

bool SceneObject::contains(const Eigen::Vector3d& p) const {
  switch (shape) {
    case ShapeKind::kBox: {
      const Eigen::Vector3d local = yaw_rotation(-yaw) * (p - center);
      return (local.cwiseAbs().array() <= (size / 2).array()).all();
    }
    case ShapeKind::kSphere:
      return (p - center).norm() <= size.x();
    case ShapeKind::kCylinder:
      return (p - center).head<2>().norm() <= size.x() &&
             std::abs(p.z() - center.z()) <= size.z() / 2;
  }
  return false;
}

std::optional<double> SceneObject::intersect(const Eigen::Vector3d& origin,
                                             const Eigen::Vector3d& dir, double t_min) const {
  switch (shape) {
    case ShapeKind::kBox: {
      const Eigen::Matrix3d r = yaw_rotation(-yaw);
      const Eigen::Vector3d o = r * (origin - center);
      const Eigen::Vector3d d = r * dir;
      const Eigen::Vector3d h = size / 2;
      double t0 = -kInf, t1 = kInf;
      for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
          if (std::abs(o[a]) > h[a]) return std::nullopt;
          continue;
        }
        double ta = (-h[a] - o[a]) / d[a], tb = (h[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      }
      if (t0 > t1) return std::nullopt;
      if (t0 > t_min) return t0;
      if (t1 > t_min) return t1;
      return std::nullopt;
    }
    case ShapeKind::kSphere: {
      const Eigen::Vector3d oc = origin - center;
      const double a = dir.squaredNorm();
      const double b = 2 * oc.dot(dir);
      const double c = oc.squaredNorm() - size.x() * size.x();
      const double disc = b * b - 4 * a * c;
      if (disc < 0) return std::nullopt;
      const double s = std::sqrt(disc);
      const double ta = (-b - s) / (2 * a), tb = (-b + s) / (2 * a);
      if (ta > t_min) return ta;
      if (tb > t_min) return tb;
      return std::nullopt;
    }
    case ShapeKind::kCylinder: {
      const Eigen::Vector3d o = origin - center;
      const double r = size.x(), hh = size.z() / 2;
      double best = kInf;
      const double a = dir.x() * dir.x() + dir.y() * dir.y();
      if (a > 0) {
        const double b = 2 * (o.x() * dir.x() + o.y() * dir.y());
        const double c = o.x() * o.x() + o.y() * o.y() - r * r;
        const double disc = b * b - 4 * a * c;
        if (disc >= 0) {
          const double s = std::sqrt(disc);
          for (double t : {(-b - s) / (2 * a), (-b + s) / (2 * a)}) {
            if (t > t_min && std::abs(o.z() + t * dir.z()) <= hh) best = std::min(best, t);
          }
        }
      }
      if (dir.z() != 0) {
        for (double zc : {-hh, hh}) {
          const double t = (zc - o.z()) / dir.z();
          const Eigen::Vector2d xy = o.head<2>() + t * dir.head<2>();
          if (t > t_min && xy.squaredNorm() <= r * r) best = std::min(best, t);
        }
      }
      if (best < kInf) return best;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

void SceneSpec::validate() const {
  require(floor_extent > 0, "floor_extent must be positive");
  require(density > 0, "density must be positive");
  require(orbit.count >= 1, "camera count must be at least 1");
  require(intrinsics.fx > 0 && intrinsics.fy > 0 && intrinsics.width > 0 &&
              intrinsics.height > 0,
          "invalid camera intrinsics");
  for (const auto& o : objects) {
    const bool ok = o.shape == ShapeKind::kBox      ? (o.size.array() > 0).all()
                    : o.shape == ShapeKind::kSphere ? o.size.x() > 0
                                                    : o.size.x() > 0 && o.size.z() > 0;
    require(ok && o.size.allFinite() && o.center.allFinite(),
            "object '" + o.name + "' is degenerate");
  }
}

namespace {

std::string shape_name(ShapeKind s) {
  switch (s) {
    case ShapeKind::kBox: return "box";
    case ShapeKind::kSphere: return "sphere";
    case ShapeKind::kCylinder: return "cylinder";
  }
  return "?";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SceneSpec read_scene_spec(const std::string& path) {
  std::istringstream in(read_text_file(path));
  SceneSpec spec;
  bool cx_set = false, cy_set = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(line_no);
    require(eq != std::string::npos, where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::istringstream value(line.substr(eq + 1));
    if (key == "seed") value >> spec.seed;
    else if (key == "floor_extent") value >> spec.floor_extent;
    else if (key == "density") value >> spec.density;
    else if (key == "camera_count") value >> spec.orbit.count;
    else if (key == "camera_radius") value >> spec.orbit.radius;
    else if (key == "camera_height") value >> spec.orbit.height;
    else if (key == "look_at") value >> spec.orbit.look_at.x() >> spec.orbit.look_at.y() >> spec.orbit.look_at.z();
    else if (key == "width") value >> spec.intrinsics.width;
    else if (key == "height") value >> spec.intrinsics.height;
    else if (key == "fx") value >> spec.intrinsics.fx;
    else if (key == "fy") value >> spec.intrinsics.fy;
    else if (key == "cx") { value >> spec.intrinsics.cx; cx_set = true; }
    else if (key == "cy") { value >> spec.intrinsics.cy; cy_set = true; }
    else if (key == "object") {
      SceneObject o;
      std::string shape;
      value >> shape >> o.name >> o.center.x() >> o.center.y() >> o.center.z();
      if (shape == "box") {
        o.shape = ShapeKind::kBox;
        value >> o.size.x() >> o.size.y() >> o.size.z();
        if (!(value >> o.yaw)) {
          o.yaw = 0;
          value.clear();
        }
      } else if (shape == "sphere") {
        o.shape = ShapeKind::kSphere;
        value >> o.size.x();
        o.size.y() = o.size.z() = o.size.x();
      } else if (shape == "cylinder") {
        o.shape = ShapeKind::kCylinder;
        value >> o.size.x() >> o.size.z();
        o.size.y() = o.size.x();
      } else {
        throw InputError(where + ": unknown shape '" + shape + "'");
      }
      spec.objects.push_back(o);
    } else {
      throw InputError(where + ": unknown key '" + key + "'");
    }
    require(!value.fail(), where + ": malformed value for '" + key + "'");
  }
  if (!cx_set) spec.intrinsics.cx = spec.intrinsics.width / 2.0;
  if (!cy_set) spec.intrinsics.cy = spec.intrinsics.height / 2.0;
  spec.validate();
  return spec;
}

std::string format_scene_spec(const SceneSpec& spec) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "seed = " << spec.seed << "\n";
  out << "floor_extent = " << spec.floor_extent << "\n";
  out << "density = " << spec.density << "\n";
  out << "camera_count = " << spec.orbit.count << "\n";
  out << "camera_radius = " << spec.orbit.radius << "\n";
  out << "camera_height = " << spec.orbit.height << "\n";
  out << "look_at = " << spec.orbit.look_at.x() << ' ' << spec.orbit.look_at.y() << ' '
      << spec.orbit.look_at.z() << "\n";
  out << "width = " << spec.intrinsics.width << "\nheight = " << spec.intrinsics.height << "\n";
  out << "fx = " << spec.intrinsics.fx << "\nfy = " << spec.intrinsics.fy << "\n";
  out << "cx = " << spec.intrinsics.cx << "\ncy = " << spec.intrinsics.cy << "\n";
  for (const auto& o : spec.objects) {
    out << "object = " << shape_name(o.shape) << ' ' << o.name << ' ' << o.center.x() << ' '
        << o.center.y() << ' ' << o.center.z();
    switch (o.shape) {
      case ShapeKind::kBox:
        out << ' ' << o.size.x() << ' ' << o.size.y() << ' ' << o.size.z() << ' ' << o.yaw;
        break;
      case ShapeKind::kSphere: out << ' ' << o.size.x(); break;
      case ShapeKind::kCylinder: out << ' ' << o.size.x() << ' ' << o.size.z(); break;
    }
    out << "\n";
  }
  return out.str();
}

SceneSpec random_scene_spec(std::uint64_t seed, int num_objects, int num_views, double min_gap) {
  static const std::vector<std::string> kNames{
      "chair", "table", "lamp",   "banana", "kettle", "monitor",
      "plant", "bucket", "stool", "backpack", "speaker", "vase"};
  require(num_objects >= 0 && num_objects <= static_cast<int>(kNames.size()),
          "random scenes hold at most " + std::to_string(kNames.size()) + " objects");
  SceneSpec spec;
  spec.seed = seed;
  spec.orbit.count = num_views;
  auto rng = make_rng(seed, 0x5ce9e);
  std::vector<std::string> names = kNames;
  std::shuffle(names.begin(), names.end(), rng);

  double spread = 1.2;
  for (int k = 0; k < num_objects; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 0 && attempt % 200 == 0) spread += 0.1;
      SceneObject o;
      o.name = names[static_cast<std::size_t>(k)];
      const int kind = static_cast<int>(uniform(rng) * 3) % 3;
      if (kind == 0) {
        o.shape = ShapeKind::kBox;
        o.size = {0.2 + 0.3 * uniform(rng), 0.2 + 0.3 * uniform(rng), 0.2 + 0.4 * uniform(rng)};
        o.yaw = uniform(rng) * std::numbers::pi;
        o.center.z() = o.size.z() / 2;
      } else if (kind == 1) {
        o.shape = ShapeKind::kSphere;
        o.size = Eigen::Vector3d::Constant(0.12 + 0.13 * uniform(rng));
        o.center.z() = o.size.x();
      } else {
        o.shape = ShapeKind::kCylinder;
        const double r = 0.1 + 0.1 * uniform(rng);
        o.size = {r, r, 0.2 + 0.4 * uniform(rng)};
        o.center.z() = o.size.z() / 2;
      }
      const double ang = 2 * std::numbers::pi * uniform(rng);
      const double rad = spread * std::sqrt(uniform(rng));
      o.center.x() = rad * std::cos(ang);
      o.center.y() = rad * std::sin(ang);
      bool ok = true;
      for (const auto& other : spec.objects) {
        const double d = (o.center.head<2>() - other.center.head<2>()).norm();
        if (d < o.footprint_radius() + other.footprint_radius() + min_gap) ok = false;
      }
      if (ok) {
        spec.objects.push_back(o);
        break;
      }
    }
  }
  return spec;
}

SynthScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  auto rng = make_rng(spec.seed, 0x9e0);
  Sampler s{{}, {}, {}, rng, 1.0 / std::sqrt(spec.density)};

  const double e = spec.floor_extent;
  s.rect(Eigen::Vector3d(-e / 2, -e / 2, 0), Eigen::Vector3d(e, 0, 0), Eigen::Vector3d(0, e, 0),
         Eigen::Vector3d::UnitZ(), SceneSpec::kFloorId, [&](const Eigen::Vector3d& p) {
           const Eigen::Vector3d lifted(p.x(), p.y(), 1e-6);
           return std::none_of(spec.objects.begin(), spec.objects.end(),
                               [&](const SceneObject& o) { return o.contains(lifted); });
         });

  auto exposed = [](const Eigen::Vector3d& p) { return p.z() >= 1e-6; };
  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const auto& o = spec.objects[k];
    const auto id = static_cast<std::int32_t>(k) + 2;
    switch (o.shape) {
      case ShapeKind::kBox: {
        const Eigen::Matrix3d r = yaw_rotation(o.yaw);
        const Eigen::Vector3d h = o.size / 2;
        for (int a = 0; a < 3; ++a) {
          const int b = (a + 1) % 3, c = (a + 2) % 3;
          for (double sign : {1.0, -1.0}) {
            const Eigen::Vector3d n = sign * r.col(a);
            const Eigen::Vector3d origin = o.center + n * h[a] - r.col(b) * h[b] - r.col(c) * h[c];
            s.rect(origin, 2 * h[b] * r.col(b), 2 * h[c] * r.col(c), n, id, exposed);
          }
        }
        break;
      }
      case ShapeKind::kSphere: {
        const double radius = o.size.x();
        const auto n = std::max<long>(
            4, std::lround(4 * std::numbers::pi * radius * radius * spec.density));
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        const double phase = 2 * std::numbers::pi * uniform(rng);
        for (long i = 0; i < n; ++i) {
          const double z = 1.0 - 2.0 * (i + 0.5) / static_cast<double>(n);
          const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
          const double phi = phase + golden * static_cast<double>(i);
          const Eigen::Vector3d dir(rho * std::cos(phi), rho * std::sin(phi), z);
          const Eigen::Vector3d p = o.center + radius * dir;
          if (exposed(p)) s.add(p, dir.normalized(), id);
        }
        break;
      }
      case ShapeKind::kCylinder: {
        const double radius = o.size.x(), height = o.size.z();
        const int nt = std::max(3, static_cast<int>(std::lround(2 * std::numbers::pi * radius / s.step)));
        const int nz = std::max(1, static_cast<int>(std::lround(height / s.step)));
        for (int i = 0; i < nt; ++i)
          for (int j = 0; j < nz; ++j) {
            const double th = 2 * std::numbers::pi * (i + uniform(rng)) / nt;
            const double z = o.center.z() - height / 2 + height * (j + uniform(rng)) / nz;
            const Eigen::Vector3d n(std::cos(th), std::sin(th), 0);
            const Eigen::Vector3d p(o.center.x() + radius * n.x(), o.center.y() + radius * n.y(), z);
            if (exposed(p)) s.add(p, n, id);
          }
        const int ng = std::max(1, static_cast<int>(std::ceil(2 * radius / s.step)));
        for (double sign : {1.0, -1.0}) {
          const double zc = o.center.z() + sign * height / 2;
          for (int i = 0; i < ng; ++i)
            for (int j = 0; j < ng; ++j) {
              const double x = -radius + 2 * radius * (i + uniform(rng)) / ng;
              const double y = -radius + 2 * radius * (j + uniform(rng)) / ng;
              const Eigen::Vector3d p(o.center.x() + x, o.center.y() + y, zc);
              if (x * x + y * y <= radius * radius && exposed(p))
                s.add(p, Eigen::Vector3d(0, 0, sign), id);
            }
        }
        break;
      }
    }
  }

  SynthScene scene;
  const auto n = static_cast<Eigen::Index>(s.points.size());
  scene.cloud.positions.resize(3, n);
  scene.cloud.normals.resize(3, n);
  scene.cloud.colors.resize(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    scene.cloud.positions.col(i) = s.points[i];
    scene.cloud.normals.col(i) = s.normals[i];
    const auto id = static_cast<std::uint32_t>(s.ids[i]);
    scene.cloud.colors.col(i) << static_cast<std::uint8_t>(60 + (id * 97) % 180),
        static_cast<std::uint8_t>(60 + (id * 57) % 180),
        static_cast<std::uint8_t>(60 + (id * 131) % 180);
  }
  scene.gt = std::move(s.ids);
  return scene;
}

std::optional<std::pair<double, std::int32_t>> ray_cast(const SceneSpec& spec,
                                                        const Eigen::Vector3d& origin,
                                                        const Eigen::Vector3d& dir) {
  double best = kInf;
  std::int32_t id = 0;
  if (dir.z() != 0) {
    const double t = -origin.z() / dir.z();
    const Eigen::Vector3d p = origin + t * dir;
    const double h = spec.floor_extent / 2;
    if (t > 1e-9 && std::abs(p.x()) <= h && std::abs(p.y()) <= h) {
      best = t;
      id = SceneSpec::kFloorId;
    }
  }
  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    if (auto t = spec.objects[k].intersect(origin, dir); t && *t < best) {
      best = *t;
      id = static_cast<std::int32_t>(k) + 2;
    }
  }
  if (id == 0) return std::nullopt;
  return std::pair{best, id};
}

Eigen::Matrix4d orbit_pose(const CameraOrbit& orbit, int index) {
  const double th = 2 * std::numbers::pi * index / orbit.count;
  const Eigen::Vector3d pos(orbit.look_at.x() + orbit.radius * std::cos(th),
                            orbit.look_at.y() + orbit.radius * std::sin(th), orbit.height);
  const Eigen::Vector3d forward = (orbit.look_at - pos).normalized();
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix4d c2w = Eigen::Matrix4d::Identity();
  c2w.block<3, 1>(0, 0) = right;
  c2w.block<3, 1>(0, 1) = down;
  c2w.block<3, 1>(0, 2) = forward;
  c2w.block<3, 1>(0, 3) = pos;
  return c2w;
}

std::vector<CameraView> render_views(const SceneSpec& spec) {
  spec.validate();
  std::vector<CameraView> views(static_cast<std::size_t>(spec.orbit.count));
  const auto& k = spec.intrinsics;
  parallel_for(views.size(), [&](std::size_t m) {
    auto& view = views[m];
    std::ostringstream id;
    id << std::setw(6) << std::setfill('0') << m;
    view.frame_id = id.str();
    view.intrinsics = k;
    view.world_to_camera = world_to_camera_from_pose(orbit_pose(spec.orbit, static_cast<int>(m)));
    const Eigen::Isometry3d c2w = view.world_to_camera.inverse();
    view.depth = DepthImage::Zero(k.height, k.width);
    view.masks.labels = LabelImage::Zero(k.height, k.width);
    for (int r = 0; r < k.height; ++r)
      for (int c = 0; c < k.width; ++c) {
        const Eigen::Vector3d dir_cam((c + 0.5 - k.cx) / k.fx, (r + 0.5 - k.cy) / k.fy, 1.0);
        if (auto hit = ray_cast(spec, c2w.translation(), c2w.linear() * dir_cam)) {
          view.depth(r, c) = static_cast<float>(hit->first);
          view.masks.labels(r, c) = hit->second;
        }
      }
    view.masks.num_masks = view.masks.labels.maxCoeff();
  });
  return views;
}

void NoiseModel::validate() const {
  require(merge_prob >= 0 && merge_prob <= 1, "merge_prob must lie in [0, 1]");
  require(split_prob >= 0 && split_prob <= 1, "split_prob must lie in [0, 1]");
  require(erode_px >= 0, "erode_px must be non-negative");
}

std::vector<MaskImage> corrupt_masks(std::span<const MaskImage> masks, const NoiseModel& model) {
  model.validate();
  std::vector<MaskImage> out(masks.size());
  parallel_for(masks.size(), [&](std::size_t m) {
    auto rng = make_rng(model.seed, m);
    LabelImage labels = masks[m].labels;
    const Eigen::Index rows = labels.rows(), cols = labels.cols();
    const std::int32_t max_label = labels.size() ? labels.maxCoeff() : 0;

    // Fuse adjacent label pairs.
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        const auto a = labels(r, c);
        if (a <= 0) continue;
        for (auto [dr, dc] : {std::pair<int, int>{0, 1}, {1, 0}}) {
          if (r + dr >= rows || c + dc >= cols) continue;
          const auto b = labels(r + dr, c + dc);
          if (b > 0 && b != a) pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
      }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    std::vector<std::int32_t> parent(static_cast<std::size_t>(max_label) + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::int32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [a, b] : pairs) {
      if (uniform(rng) < model.merge_prob) {
        const auto ra = find(a), rb = find(b);
        parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      if (labels.data()[i] > 0) labels.data()[i] = find(labels.data()[i]);

    // Split labels by a random line through their centroid.
    std::vector<Eigen::Vector3d> acc(static_cast<std::size_t>(max_label) + 1, Eigen::Vector3d::Zero());
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        if (labels(r, c) > 0) acc[labels(r, c)] += Eigen::Vector3d(c + 0.5, r + 0.5, 1.0);
    std::int32_t next = max_label + 1;
    std::vector<std::int32_t> split_to(acc.size(), 0);
    std::vector<Eigen::Vector3d> line(acc.size(), Eigen::Vector3d::Zero());
    for (std::size_t l = 1; l < acc.size(); ++l) {
      if (acc[l].z() == 0) continue;
      const double draw = uniform(rng);
      const double angle = 2 * std::numbers::pi * uniform(rng);
      if (draw >= model.split_prob) continue;
      const Eigen::Vector2d centroid = acc[l].head<2>() / acc[l].z();
      const Eigen::Vector2d normal(std::cos(angle), std::sin(angle));
      line[l] = Eigen::Vector3d(normal.x(), normal.y(), -normal.dot(centroid));
      split_to[l] = next++;
    }
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        const auto l = labels(r, c);
        if (l > 0 && split_to[l] && line[l].dot(Eigen::Vector3d(c + 0.5, r + 0.5, 1.0)) > 0)
          labels(r, c) = split_to[l];
      }

    // Erode boundaries.
    if (model.erode_px > 0) {
      const int e = model.erode_px;
      LabelImage eroded = labels;
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
          const auto l = labels(r, c);
          if (l == 0) continue;
          bool edge = false;
          for (Eigen::Index rr = std::max<Eigen::Index>(0, r - e);
               !edge && rr <= std::min(rows - 1, r + e); ++rr)
            for (Eigen::Index cc = std::max<Eigen::Index>(0, c - e);
                 cc <= std::min(cols - 1, c + e); ++cc)
              if (labels(rr, cc) != l) {
                edge = true;
                break;
              }
          if (edge) eroded(r, c) = 0;
        }
      labels = std::move(eroded);
    }
    out[m] = densify(labels);
  });
  return out;
}

std::vector<std::uint8_t> observed_points(const PointCloud& cloud,
                                          std::span<const CameraView> views, double tolerance) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(cloud.size()), 0);
  for (const auto& view : views) {
    const auto proj = project_points(cloud, view, tolerance);
    for (std::size_t i = 0; i < seen.size(); ++i) seen[i] |= proj.visible[i];
  }
  return seen;
}

LabelTable scene_label_table(const SceneSpec& spec) {
  LabelTable t;
  t[SceneSpec::kFloorId] = "floor";
  for (std::size_t k = 0; k < spec.objects.size(); ++k)
    t[static_cast<std::int32_t>(k) + 2] = spec.objects[k].name;
  return t;
}

SynthBundle make_synth_bundle(const SceneSpec& spec, const NoiseModel& noise) {
  SynthBundle b;
  b.spec = spec;
  SynthScene scene = generate_scene(spec);

  // Storage precision of the scene directory.
  b.cloud = scene.cloud;
  b.cloud.positions = scene.cloud.positions.cast<float>().cast<double>();
  b.cloud.normals = scene.cloud.normals.cast<float>().cast<double>();

  b.views = render_views(spec);
  std::vector<MaskImage> gt_masks;
  for (auto& v : b.views) {
    v.depth = ((v.depth * 1000.0f).round().cast<std::uint16_t>()).cast<float>() / 1000.0f;
    b.semantic.push_back(v.masks.labels);
    gt_masks.push_back(v.masks);
  }
  const auto masks = corrupt_masks(gt_masks, noise);
  for (std::size_t m = 0; m < b.views.size(); ++m) b.views[m].masks = masks[m];

  b.object_ids = scene.gt;
  const auto seen = observed_points(b.cloud, b.views);
  b.gt.resize(seen.size());
  for (std::size_t i = 0; i < seen.size(); ++i) b.gt[i] = seen[i] ? scene.gt[i] : 0;
  b.labels = scene_label_table(spec);
  return b;
}

void write_scene_directory(const std::string& root, const SynthBundle& bundle) {
  namespace fs = std::filesystem;
  const fs::path base(root);
  for (const char* sub : {"poses", "depth", "masks", "semantic"}) fs::create_directories(base / sub);
  write_ply((base / "cloud.ply").string(), bundle.cloud);
  require(!bundle.views.empty(), "scene has no views");
  write_intrinsics((base / "intrinsics.txt").string(), bundle.views.front().intrinsics);
  for (std::size_t m = 0; m < bundle.views.size(); ++m) {
    const auto& v = bundle.views[m];
    write_matrix4((base / "poses" / (v.frame_id + ".txt")).string(),
                  orbit_pose(bundle.spec.orbit, static_cast<int>(m)));
    write_depth_png((base / "depth" / (v.frame_id + ".png")).string(), v.depth);
    save_mask_image((base / "masks" / (v.frame_id + ".png")).string(), v.masks);
    write_png16((base / "semantic" / (v.frame_id + ".png")).string(),
                bundle.semantic[m].cast<std::uint16_t>());
  }
  write_label_table((base / "labels.json").string(), bundle.labels);
  write_id_list((base / "gt_instances.txt").string(), bundle.gt);
  std::ofstream cfg(base / "scene.cfg");
  cfg << format_scene_spec(bundle.spec);
}

}  // namespace spgrow
