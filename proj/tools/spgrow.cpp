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

// spgrow: superpoint region growing over multi-view 2D masks.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spgrow/io.hpp"
#include "spgrow/parallel.hpp"
#include "spgrow/pipeline.hpp"

namespace fs = std::filesystem;
using namespace spgrow;

namespace {

struct Options {
  unsigned threads = 0;
  std::uint64_t seed = 7;
  PipelineConfig pipeline;
  std::vector<double> thresholds = kFineSchedule;
  std::string criterion = "multi";
  double views_fraction = 1.0;

  PipelineConfig config() const {
    PipelineConfig c = pipeline;
    c.growth.thresholds = thresholds;
    require(criterion == "multi" || criterion == "pairwise",
            "--criterion must be 'multi' or 'pairwise'");
    c.growth.criterion =
        criterion == "multi" ? MergeCriterion::kMultiLevel : MergeCriterion::kPairwise;
    c.validate();
    return c;
  }
};

void write_json(const std::string& path, const nlohmann::json& j, int indent = 2) {
  if (path.empty()) return;
  std::ofstream out(path);
  out << j.dump(indent) << "\n";
  require(out.good(), "cannot write " + path);
}

void log_empty_frames(const std::vector<std::string>& frames) {
  for (const auto& f : frames) std::cerr << "note: frame " << f << " sees no superpoint\n";
}

SuperpointPartition read_superpoints(const std::string& path, const Scene& scene) {
  const auto ids = read_id_list(path);
  require(static_cast<Index>(ids.size()) == scene.cloud.size(),
          path + ": " + std::to_string(ids.size()) + " labels for " +
              std::to_string(scene.cloud.size()) + " points");
  return SuperpointPartition::from_labels(ids);
}

std::vector<std::int64_t> partition_labels(const SuperpointPartition& p) {
  return {p.label.begin(), p.label.end()};
}

std::map<std::int64_t, double> read_confidence(const std::string& path) {
  std::map<std::int64_t, double> out;
  if (path.empty()) return out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
    for (const auto& [key, value] : j.items()) out[std::stoll(key)] = value.at("confidence");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return out;
}

void print_report(const std::string& name, const APReport& report) {
  const std::pair<std::string, APReport> rows[] = {{name, report}};
  std::cout << report_table(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot 3D instance segmentation by superpoint region growing"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value file with option defaults");

  Options opt;
  auto& p = opt.pipeline;
  app.add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  app.add_option("--seed", opt.seed, "Seed for synthetic scenes and mask noise")
      ->capture_default_str();
  app.add_option("--depth-tolerance", p.depth_tolerance, "Visibility depth tolerance (m)")
      ->capture_default_str();
  app.add_option("--normal-knn", p.normal_knn, "Neighbors for normal estimation")
      ->capture_default_str();
  app.add_option("--knn", p.felzenszwalb.knn, "Neighbors of the segmentation graph")
      ->capture_default_str();
  app.add_option("--scale", p.felzenszwalb.threshold_scale, "Segmentation threshold scale")
      ->capture_default_str();
  app.add_option("--min-size", p.felzenszwalb.min_size, "Minimum superpoint size")
      ->capture_default_str();
  app.add_option("--radius", p.adjacency_radius, "Superpoint adjacency radius (m)")
      ->capture_default_str();
  app.add_option("--w-min", p.w_min, "Minimum accumulated view weight")->capture_default_str();
  app.add_option("--thresholds", opt.thresholds, "Descending growth thresholds")
      ->capture_default_str();
  app.add_option("--gamma", p.growth.gamma, "Hop decay of the multi-level criterion")
      ->capture_default_str();
  app.add_option("--criterion", opt.criterion, "multi or pairwise")->capture_default_str();
  app.add_option("--min-points", p.min_points, "Drop regions with fewer points")
      ->capture_default_str();
  app.add_flag("!--no-segs", p.use_segs, "Ignore segs.json");
  app.add_flag("--point-level", p.point_level, "Singleton superpoints on a k-NN graph");
  app.add_option("--point-knn", p.point_knn, "Neighbors for --point-level")
      ->capture_default_str();
  app.add_option("--views-fraction", opt.views_fraction, "Use the first ceil(f*M) frames")
      ->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic scene directory");
  std::string synth_out, synth_spec;
  int synth_objects = 8, synth_views = 24;
  NoiseModel noise;
  synth->add_option("--out", synth_out, "Output scene directory")->required();
  synth->add_option("--spec", synth_spec, "Scene spec file (default: random scene)");
  synth->add_option("--objects", synth_objects, "Objects in a random scene")->capture_default_str();
  synth->add_option("--views", synth_views, "Orbit cameras in a random scene")->capture_default_str();
  synth->add_option("--merge-prob", noise.merge_prob, "Mask fusion probability");
  synth->add_option("--split-prob", noise.split_prob, "Mask split probability");
  synth->add_option("--erode", noise.erode_px, "Mask erosion radius (px)");

  // oversegment
  auto* overseg = app.add_subcommand("oversegment", "Write per-point superpoint labels");
  std::string scene_dir, superpoints_path, affinity_path, out_path;
  overseg->add_option("--scene", scene_dir, "Scene directory")->required();
  overseg->add_option("--out", out_path, "superpoints.txt to write")->required();

  // affinity
  auto* affinity = app.add_subcommand("affinity", "Write superpoint affinities");
  affinity->add_option("--scene", scene_dir, "Scene directory")->required();
  affinity->add_option("--superpoints", superpoints_path, "superpoints.txt")->required();
  affinity->add_option("--out", out_path, "Affinity dump to write")->required();

  // grow
  auto* grow = app.add_subcommand("grow", "Grow instances from cached stages");
  grow->add_option("--scene", scene_dir, "Scene directory")->required();
  grow->add_option("--superpoints", superpoints_path, "superpoints.txt")->required();
  grow->add_option("--affinity", affinity_path, "Affinity dump")->required();
  grow->add_option("--out", out_path, "Output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Full pipeline");
  bool do_eval = false, write_ply_out = false;
  run->add_option("--scene", scene_dir, "Scene directory")->required();
  run->add_option("--out", out_path, "Output directory")->required();
  run->add_flag("--eval", do_eval, "Evaluate against gt_instances.txt");
  run->add_flag("--ply", write_ply_out, "Also write instances.ply");

  // eval
  auto* eval = app.add_subcommand("eval", "Class-agnostic AP of a prediction");
  std::string pred_path, gt_path, regions_path;
  eval->add_option("--pred", pred_path, "instances.txt")->required();
  eval->add_option("--gt", gt_path, "gt_instances.txt")->required();
  eval->add_option("--regions", regions_path, "regions.json with confidences");
  eval->add_option("--out", out_path, "Report JSON to write");

  // query
  auto* query = app.add_subcommand("query", "Open-vocabulary instance query");
  std::string instances_path, text, highlight_path;
  double query_threshold = 0.5, vote_radius = kDefaultVoteRadius;
  query->add_option("--scene", scene_dir, "Scene directory with semantic/")->required();
  query->add_option("--instances", instances_path, "instances.txt")->required();
  query->add_option("--prompt,--text", text, "Label name to look up")->required();
  query->add_option("--threshold", query_threshold, "Overlap threshold")->capture_default_str();
  query->add_option("--vote-radius", vote_radius, "Back-projection radius (m)")
      ->capture_default_str();
  query->add_option("--out", out_path, "Result JSON to write");
  query->add_option("--ply", highlight_path, "PLY with matched instances in red");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Ablation table over pipeline variants");
  std::vector<std::string> scene_dirs;
  int bench_scenes = 5;
  double fixed_threshold = 0.7;
  NoiseModel bench_noise{0.3, 0.2, 2, 0};
  ablate->add_option("--scenes", scene_dirs, "Scene directories (default: seeded benchmark)");
  ablate->add_option("--benchmark", bench_scenes, "Benchmark scenes")->capture_default_str();
  ablate->add_option("--objects", synth_objects, "Objects per benchmark scene")
      ->capture_default_str();
  ablate->add_option("--views", synth_views, "Views per benchmark scene")->capture_default_str();
  ablate->add_option("--merge-prob", bench_noise.merge_prob)->capture_default_str();
  ablate->add_option("--split-prob", bench_noise.split_prob)->capture_default_str();
  ablate->add_option("--erode", bench_noise.erode_px)->capture_default_str();
  ablate->add_option("--fixed-threshold", fixed_threshold, "Threshold of single-stage rows")
      ->capture_default_str();
  ablate->add_option("--out", out_path, "Report JSON to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    set_thread_count(opt.threads);

    if (*synth) {
      SceneSpec spec = synth_spec.empty()
                           ? random_scene_spec(opt.seed, synth_objects, synth_views)
                           : read_scene_spec(synth_spec);
      noise.seed = opt.seed;
      write_scene_directory(synth_out, make_synth_bundle(spec, noise));
      return 0;
    }

    if (*eval) {
      const auto pred = read_id_list(pred_path);
      const auto gt = read_id_list(gt_path);
      require(pred.size() == gt.size(), "prediction and ground truth lengths differ");
      auto conf = read_confidence(regions_path);
      for (auto id : pred)
        if (id != 0) conf.try_emplace(id, 1.0);
      const APReport report = evaluate_instances(pred, conf, gt);
      write_json(out_path, report_to_json(report, true));
      print_report(fs::path(pred_path).filename().string(), report);
      return 0;
    }

    if (*ablate) {
      const PipelineConfig base = opt.config();
      std::vector<std::vector<APReport>> per(ablation_variants().size());
      auto add = [&](const Scene& scene) {
        const auto reports = ablate_scene(scene, base, fixed_threshold);
        for (std::size_t v = 0; v < reports.size(); ++v) per[v].push_back(reports[v]);
      };
      if (scene_dirs.empty()) {
        const auto specs = benchmark_specs(opt.seed, bench_scenes, synth_objects, synth_views);
        for (std::size_t s = 0; s < specs.size(); ++s) {
          NoiseModel n = bench_noise;
          n.seed = opt.seed * 1000 + s;
          add(scene_from_bundle(make_synth_bundle(specs[s], n), opt.views_fraction));
        }
      } else {
        for (const auto& dir : scene_dirs) add(load_scene(dir, opt.views_fraction));
      }
      std::vector<std::pair<std::string, APReport>> rows;
      nlohmann::json j = nlohmann::json::array();
      const auto variants = ablation_variants();
      for (std::size_t v = 0; v < variants.size(); ++v) {
        rows.emplace_back(variants[v].name, mean_report(per[v]));
        j.push_back({{"variant", variants[v].name}, {"report", report_to_json(rows.back().second)}});
      }
      std::cout << report_table(rows);
      write_json(out_path, j);
      return 0;
    }

    const PipelineConfig config = opt.config();
    const Scene scene = load_scene(scene_dir, opt.views_fraction);

    if (*overseg) {
      const auto over = oversegment_scene(scene, config);
      write_id_list(out_path, partition_labels(over.partition));
      std::cout << over.partition.num_superpoints() << " superpoints\n";
      return 0;
    }

    if (*affinity) {
      Oversegmentation over;
      over.partition = read_superpoints(superpoints_path, scene);
      over.adjacency = partition_adjacency(scene.cloud, over.partition, config);
      std::vector<std::string> empty;
      save_affinity(out_path, scene_affinity(scene, over, config, &empty));
      log_empty_frames(empty);
      return 0;
    }

    if (*grow) {
      Oversegmentation over;
      over.partition = read_superpoints(superpoints_path, scene);
      over.adjacency = partition_adjacency(scene.cloud, over.partition, config);
      const AffinityMatrix matrix = load_affinity(affinity_path);
      require(matrix.num_nodes() == over.partition.num_superpoints(),
              affinity_path + " does not match " + superpoints_path);
      const Instances inst = grow_instances(over, matrix, config);
      write_instances(out_path, inst);
      std::cout << inst.confidence.size() << " instances\n";
      return 0;
    }

    if (*run) {
      const PipelineResult result = run_pipeline(scene, config);
      log_empty_frames(result.empty_frames);
      fs::create_directories(out_path);
      write_id_list((fs::path(out_path) / "superpoints.txt").string(),
                    partition_labels(result.over.partition));
      save_affinity((fs::path(out_path) / "affinity.txt").string(), result.affinity);
      write_instances(out_path, result.instances);
      if (write_ply_out)
        write_colored_ply((fs::path(out_path) / "instances.ply").string(), scene.cloud,
                          result.instances.point_ids);
      std::cout << result.instances.confidence.size() << " instances\n";
      if (do_eval) {
        require(result.report.has_value(), "--eval needs gt_instances.txt in the scene");
        write_json((fs::path(out_path) / "report.json").string(),
                   report_to_json(*result.report, true));
        print_report(fs::path(scene_dir).filename().string(), *result.report);
      }
      return 0;
    }

    if (*query) {
      require(!scene.semantic.empty(), "scene has no semantic/ frames");
      const auto instances = read_id_list(instances_path);
      require(static_cast<Index>(instances.size()) == scene.cloud.size(),
              instances_path + " does not match the cloud");
      std::vector<SemanticFrame> frames;
      for (std::size_t m = 0; m < scene.views.size(); ++m)
        frames.push_back({&scene.views[m], scene.semantic[m]});
      const auto labels = backproject_semantics(frames, scene.cloud, vote_radius);
      const auto result = query_instances(instances, labels, scene.labels, text, query_threshold);
      const auto j = query_to_json(result);
      write_json(out_path, j);
      if (!highlight_path.empty()) {
        PointCloud lit = scene.cloud;
        lit.colors.setConstant(3, lit.size(), 160);
        for (const auto& [id, overlap] : result.instances)
          for (Index i = 0; i < lit.size(); ++i)
            if (instances[i] == id) lit.colors.col(i) << 230, 30, 30;
        write_ply(highlight_path, lit);
      }
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
