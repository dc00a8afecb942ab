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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spgrow/io.hpp"
#include "spgrow/parallel.hpp"
#include "spgrow/pipeline.hpp"

using namespace spgrow;
namespace fs = std::filesystem;

namespace {

template <typename A, typename B>
bool same(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a == b).all();
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

double mean_ap(const std::vector<Scene>& scenes, const std::vector<double>& thresholds) {
  PipelineConfig config;
  config.growth.thresholds = thresholds;
  std::vector<APReport> reports;
  for (const auto& s : scenes) reports.push_back(*run_pipeline(s, config).report);
  return mean_report(reports).ap;
}

std::vector<Scene> noisy_benchmark(const NoiseModel& noise) {
  std::vector<Scene> scenes;
  const auto specs = benchmark_specs(7, 5, 8, 24);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto n = noise;
    n.seed = 7000 + i;
    scenes.push_back(scene_from_bundle(make_synth_bundle(specs[i], n)));
  }
  return scenes;
}

}  // namespace

TEST_CASE("a written scene directory loads back to the bundle") {
  const auto bundle = make_synth_bundle(random_scene_spec(2, 4, 6));
  const auto dir = fresh_dir("spgrow_scene_rt");
  write_scene_directory(dir.string(), bundle);
  const auto disk = load_scene(dir.string());
  const auto mem = scene_from_bundle(bundle);
  CHECK(disk.cloud.positions == mem.cloud.positions);
  CHECK(disk.cloud.normals == mem.cloud.normals);
  REQUIRE(disk.views.size() == mem.views.size());
  for (std::size_t v = 0; v < mem.views.size(); ++v) {
    CHECK(disk.views[v].frame_id == mem.views[v].frame_id);
    CHECK(disk.views[v].world_to_camera.matrix() == mem.views[v].world_to_camera.matrix());
    CHECK(same(disk.views[v].depth, mem.views[v].depth));
    CHECK(same(disk.views[v].masks.labels, mem.views[v].masks.labels));
    CHECK(same(disk.semantic[v], mem.semantic[v]));
  }
  CHECK(disk.labels == mem.labels);
  CHECK(disk.gt == mem.gt);
  CHECK(!disk.segs.has_value());

  // Same results from disk and memory.
  const auto a = run_pipeline(disk, {});
  const auto b = run_pipeline(mem, {});
  CHECK(a.instances.point_ids == b.instances.point_ids);
}

TEST_CASE("loading errors name the offending path") {
  const auto bundle = make_synth_bundle(random_scene_spec(2, 2, 3));
  const auto dir = fresh_dir("spgrow_scene_err");
  write_scene_directory(dir.string(), bundle);
  fs::remove_all(dir / "depth");
  try {
    load_scene(dir.string());
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find((dir / "depth").string()) != std::string::npos);
  }
  write_scene_directory(dir.string(), bundle);
  fs::remove(dir / "masks" / (bundle.views[1].frame_id + ".png"));
  try {
    load_scene(dir.string());
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find(bundle.views[1].frame_id) != std::string::npos);
  }
  CHECK_THROWS_AS(load_scene((dir / "nowhere").string()), InputError);
}

TEST_CASE("view subsampling") {
  CHECK(views_used(100, 0.01) == 1);
  CHECK(views_used(100, 0.05) == 5);
  CHECK(views_used(48, 0.2) == 10);
  CHECK(views_used(3, 0.001) == 1);
  CHECK(views_used(24, 1.0) == 24);
  CHECK_THROWS_AS(views_used(10, 0.0), InputError);
  const auto bundle = make_synth_bundle(random_scene_spec(4, 2, 10));
  const auto s = scene_from_bundle(bundle, 0.25);
  REQUIRE(s.views.size() == 3);
  CHECK(s.views[2].frame_id == bundle.views[2].frame_id);
  CHECK(s.semantic.size() == 3);
}

TEST_CASE("dataset segments and binary mask directories") {
  const auto bundle = make_synth_bundle(random_scene_spec(5, 3, 6));
  const auto dir = fresh_dir("spgrow_scene_segs");
  write_scene_directory(dir.string(), bundle);

  // Segments from the ground truth object ids (floor split in two).
  std::vector<std::int64_t> segs(bundle.object_ids.begin(), bundle.object_ids.end());
  for (Index i = 0; i < bundle.cloud.size(); ++i)
    if (segs[i] == 1 && bundle.cloud.positions(0, i) > 0) segs[i] = 100;
  {
    nlohmann::json j;
    j["segIndices"] = segs;
    std::ofstream(dir / "segs.json") << j.dump();
  }
  const auto scene = load_scene(dir.string());
  REQUIRE(scene.segs.has_value());
  const auto over = oversegment_scene(scene, {});
  CHECK(over.partition.label == SuperpointPartition::from_labels(segs).label);
  PipelineConfig own;
  own.use_segs = false;
  CHECK(oversegment_scene(scene, own).partition.num_superpoints() != over.partition.num_superpoints());

  // Replace the first frame's label PNG with binary masks and scores.
  const auto id = bundle.views.front().frame_id;
  const auto labels = bundle.views.front().masks.labels;
  fs::remove(dir / "masks" / (id + ".png"));
  fs::create_directories(dir / "masks" / id);
  std::ofstream scores(dir / "masks" / id / "scores.txt");
  for (int k = 1; k <= labels.maxCoeff(); ++k) {
    const Image16 m =
        (labels == k).cast<std::uint16_t>() * 255;
    write_png16((dir / "masks" / id / ("mask_" + std::to_string(k - 1) + ".png")).string(), m);
    scores << 1.0 - 0.01 * k << "\n";
  }
  scores.close();
  const auto binary = load_scene(dir.string());
  CHECK(same(binary.views.front().masks.labels, labels));
}

TEST_CASE("thread count does not change any output") {
  const auto bundle = make_synth_bundle(random_scene_spec(6, 5, 8), {0.2, 0.2, 1, 3});
  const auto scene = scene_from_bundle(bundle);
  std::vector<std::string> files;
  for (int threads : {1, 4}) {
    set_thread_count(threads);
    const auto r = run_pipeline(scene, {});
    const auto dir = fresh_dir("spgrow_threads_" + std::to_string(threads));
    fs::create_directories(dir);
    write_instances(dir.string(), r.instances);
    save_affinity((dir / "affinity.txt").string(), r.affinity);
    for (const char* f : {"instances.txt", "instances.json", "regions.json", "affinity.txt"})
      files.push_back(slurp(dir / f));
  }
  set_thread_count(0);
  for (std::size_t f = 0; f < 4; ++f) CHECK(files[f] == files[f + 4]);
}

TEST_CASE("zero-noise scene is segmented perfectly") {
  const auto scene = scene_from_bundle(make_synth_bundle(random_scene_spec(11, 6, 16)));
  const auto r = run_pipeline(scene, {});
  REQUIRE(r.report.has_value());
  CHECK(r.report->ap == 1.0);
  CHECK(r.report->ap25 == 1.0);
  // Every point carries an instance and confidences cover every id.
  for (auto id : r.instances.point_ids) {
    CHECK(id >= 1);
    CHECK(r.instances.confidence.count(id) == 1);
  }
}

TEST_CASE("output formats") {
  Instances inst;
  inst.point_ids = {1, 1, 2, 2, 1, 0};
  inst.confidence = {{1, 0.75}, {2, 1.0}};
  inst.sizes = {{1, 3}, {2, 2}};
  const auto j = instances_to_json(inst.point_ids);
  CHECK(j.at("1") == nlohmann::json::parse("[[0, 2], [4, 5]]"));
  CHECK(j.at("2") == nlohmann::json::parse("[[2, 4]]"));
  CHECK(!j.contains("0"));
  const auto r = regions_to_json(inst);
  CHECK(r.at("1").at("confidence") == 0.75);
  CHECK(r.at("1").at("size") == 3);
  const auto dir = fresh_dir("spgrow_out");
  fs::create_directories(dir);
  write_instances(dir.string(), inst);
  CHECK(read_id_list((dir / "instances.txt").string()) == inst.point_ids);
}

TEST_CASE("min_points drops small regions and renumbers") {
  const auto scene = scene_from_bundle(make_synth_bundle(random_scene_spec(13, 3, 8), {0, 0.4, 0, 1}));
  PipelineConfig config;
  config.growth.thresholds = {0.9};
  const auto all = run_pipeline(scene, config);
  config.min_points = 200;
  const auto big = run_pipeline(scene, config);
  std::int64_t max_id = 0;
  for (auto [id, n] : big.instances.sizes) {
    CHECK(n >= 200);
    max_id = std::max(max_id, id);
  }
  CHECK(max_id == static_cast<std::int64_t>(big.instances.sizes.size()));
  CHECK(big.instances.sizes.size() <= all.instances.sizes.size());
}

TEST_CASE("ablation produces one report per variant") {
  const auto scene = scene_from_bundle(make_synth_bundle(random_scene_spec(14, 3, 8)));
  const auto variants = ablation_variants();
  CHECK(variants.size() == 5);
  CHECK(variants.front().point_level);
  CHECK(variants.back().progressive);
  CHECK(variants.back().criterion == MergeCriterion::kMultiLevel);
  const auto reports = ablate_scene(scene, {}, 0.7);
  CHECK(reports.size() == 5);
  CHECK(reports.back().ap == 1.0);
  const auto full = variant_config({}, variants.back(), 0.7);
  CHECK(full.growth.thresholds == kFineSchedule);
  const auto single = variant_config({}, variants[1], 0.7);
  CHECK(single.growth.thresholds == std::vector<double>{0.7});
  CHECK(single.growth.criterion == MergeCriterion::kPairwise);
}

// Progressive schedule versus each of its thresholds on its own, 8-object
// scenes whose masks are merged or split with probability 0.3.
TEST_CASE("cluttered schedule matches or beats every fixed threshold under corrupted masks") {
  const auto scenes = noisy_benchmark({0.3, 0.3, 0, 0});
  const double schedule = mean_ap(scenes, kClutteredSchedule);
  for (double t : kClutteredSchedule) {
    CAPTURE(t);
    CHECK(schedule >= mean_ap(scenes, {t}));
  }
}

TEST_CASE("cluttered schedule under split-only corruption") {
  const auto scenes = noisy_benchmark({0.0, 0.3, 0, 0});
  const double schedule = mean_ap(scenes, kClutteredSchedule);
  for (double t : kClutteredSchedule) {
    CAPTURE(t);
    CHECK(schedule >= mean_ap(scenes, {t}));
  }
}
