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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "spgrow/openvocab.hpp"
#include "spgrow/synth.hpp"

using namespace spgrow;

namespace {

// Camera at the origin looking down +z at a plane z = 2 sampled every 1 cm.
struct PlaneSetup {
  PointCloud cloud;
  CameraView view;
};

PlaneSetup plane_setup() {
  PlaneSetup s;
  const int nx = 201, ny = 161;
  s.cloud.positions.resize(3, nx * ny);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) s.cloud.positions.col(y * nx + x) << -1.0 + 0.01 * x, -0.8 + 0.01 * y, 2.0;
  s.view.intrinsics = {260.0, 260.0, 160.0, 120.0, 320, 240};
  s.view.world_to_camera = Eigen::Isometry3d::Identity();
  s.view.frame_id = "0";
  s.view.depth = DepthImage::Constant(240, 320, 2.0f);
  return s;
}

}  // namespace

TEST_CASE("fronto-parallel plane is labeled from one view") {
  const auto s = plane_setup();
  std::vector<SemanticFrame> frames{{&s.view, LabelImage::Constant(240, 320, 4)}};
  const auto labels = backproject_semantics(frames, s.cloud);
  const auto hit = std::count(labels.begin(), labels.end(), 4);
  CHECK(hit >= 0.99 * s.cloud.size());
  CHECK(std::count(labels.begin(), labels.end(), 0) + hit == s.cloud.size());

  std::vector<SemanticFrame> blank{{&s.view, LabelImage::Zero(240, 320)}};
  const auto none = backproject_semantics(blank, s.cloud);
  CHECK(std::all_of(none.begin(), none.end(), [](std::int32_t l) { return l == 0; }));

  // Pixels without depth cast no votes.
  auto nodepth = s;
  nodepth.view.depth.setZero();
  std::vector<SemanticFrame> dry{{&nodepth.view, LabelImage::Constant(240, 320, 4)}};
  const auto dl = backproject_semantics(dry, nodepth.cloud);
  CHECK(std::all_of(dl.begin(), dl.end(), [](std::int32_t l) { return l == 0; }));
}

TEST_CASE("majority vote across views, ties to the lower label") {
  const auto s = plane_setup();
  std::vector<SemanticFrame> frames{{&s.view, LabelImage::Constant(240, 320, 7)},
                                    {&s.view, LabelImage::Constant(240, 320, 3)},
                                    {&s.view, LabelImage::Constant(240, 320, 7)}};
  const auto two_to_one = backproject_semantics(frames, s.cloud);
  // Points hit by a pixel in every view carry 7; a point reached by exactly
  // one pixel per view has votes 2:1.
  CHECK(std::count(two_to_one.begin(), two_to_one.end(), 7) >= 0.99 * s.cloud.size());
  CHECK(std::count(two_to_one.begin(), two_to_one.end(), 3) == 0);

  std::vector<SemanticFrame> tie{{&s.view, LabelImage::Constant(240, 320, 7)},
                                 {&s.view, LabelImage::Constant(240, 320, 3)}};
  const auto t = backproject_semantics(tie, s.cloud);
  CHECK(std::count(t.begin(), t.end(), 7) == 0);
  std::vector<SemanticFrame> tie_rev{tie[1], tie[0]};
  CHECK(backproject_semantics(tie_rev, s.cloud) == t);
}

TEST_CASE("back-projection is independent of view order") {
  const auto bundle = make_synth_bundle(random_scene_spec(3, 5, 8));
  std::vector<SemanticFrame> frames;
  for (std::size_t v = 0; v < bundle.views.size(); ++v)
    frames.push_back({&bundle.views[v], bundle.semantic[v]});
  const auto a = backproject_semantics(frames, bundle.cloud);
  std::mt19937_64 rng(4);
  std::shuffle(frames.begin(), frames.end(), rng);
  CHECK(backproject_semantics(frames, bundle.cloud) == a);
}

TEST_CASE("queries use instance-relative overlap") {
  // Instance 1: 10 points all "banana". Instance 2: 10 points, 4 "banana".
  // Instance 3: 10 points, 6 "banana".
  std::vector<std::int64_t> inst;
  std::vector<std::int32_t> lab;
  for (int i = 0; i < 10; ++i) inst.push_back(1), lab.push_back(1);
  for (int i = 0; i < 10; ++i) inst.push_back(2), lab.push_back(i < 4 ? 1 : 2);
  for (int i = 0; i < 10; ++i) inst.push_back(3), lab.push_back(i < 6 ? 1 : 0);
  const LabelTable table{{1, "banana"}, {2, "toilet roll"}};
  const auto r = query_instances(inst, lab, table, "banana");
  REQUIRE(r.instances.size() == 2);
  CHECK(r.instances[0] == std::pair<std::int64_t, double>{1, 1.0});
  CHECK(r.instances[1].first == 3);
  CHECK(r.instances[1].second == doctest::Approx(0.6));
  CHECK(query_instances(inst, lab, table, "kettle").instances.empty());
  const auto roll = query_instances(inst, lab, table, "toilet roll");
  REQUIRE(roll.instances.size() == 1);
  CHECK(roll.instances[0].first == 2);
  const auto j = query_to_json(r);
  CHECK(j.at("query") == "banana");
  CHECK(j.at("instances").size() == 2);

  // Raising the threshold never adds instances.
  std::size_t prev = 99;
  for (double t : {0.0, 0.3, 0.5, 0.59, 0.61, 0.99}) {
    const auto q = query_instances(inst, lab, table, "banana", t);
    CHECK(q.instances.size() <= prev);
    prev = q.instances.size();
  }
}

TEST_CASE("label table round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "spgrow_labels.json").string();
  const LabelTable table{{1, "floor"}, {2, "toilet roll"}, {14, "chair"}};
  write_label_table(path, table);
  CHECK(read_label_table(path) == table);
}

TEST_CASE("synthetic scene: each name returns exactly its object") {
  const auto spec = random_scene_spec(9, 8, 12);
  const auto bundle = make_synth_bundle(spec);
  std::vector<SemanticFrame> frames;
  for (std::size_t v = 0; v < bundle.views.size(); ++v)
    frames.push_back({&bundle.views[v], bundle.semantic[v]});
  const auto labels = backproject_semantics(frames, bundle.cloud);
  std::vector<std::int64_t> inst(bundle.object_ids.begin(), bundle.object_ids.end());
  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const auto r = query_instances(inst, labels, bundle.labels, spec.objects[k].name);
    REQUIRE(r.instances.size() == 1);
    CHECK(r.instances[0].first == static_cast<std::int64_t>(k) + 2);
  }
}
