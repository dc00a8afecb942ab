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

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "spgrow/parallel.hpp"
#include "spgrow/pipeline.hpp"

using namespace spgrow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

constexpr std::uint64_t kSeed = 7;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Scene> benchmark(const NoiseModel& noise, int views) {
  std::vector<Scene> scenes;
  const auto specs = benchmark_specs(kSeed, 5, 8, views);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto n = noise;
    n.seed = kSeed * 1000 + i;
    scenes.push_back(scene_from_bundle(make_synth_bundle(specs[i], n)));
  }
  return scenes;
}

Outcome oracle_end_to_end() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  int perfect = 0;
  for (int i = 0; i < 10; ++i) {
    const int objects = 1 + i;            // 1..10
    const int views = 12 + (i * 12) / 9;  // 12..24
    const auto scene = scene_from_bundle(make_synth_bundle(random_scene_spec(100 + i, objects, views)));
    const auto r = run_pipeline(scene, {});
    const bool ok = r.report && r.report->ap == 1.0 && r.report->ap50 == 1.0 && r.report->ap25 == 1.0;
    perfect += ok;
    if (!ok) o.detail += fmt("scene %d: AP %.4f AP50 %.4f AP25 %.4f; ", i, r.report->ap, r.report->ap50, r.report->ap25);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.pass = perfect == 10 && secs <= 60.0;
  o.detail += fmt("%d/10 scenes at AP = AP50 = AP25 = 1, %.1f s", perfect, secs);
  return o;
}

Outcome affinity_equivalence() {
  std::mt19937_64 rng(kSeed);
  double worst = 0;
  bool symmetric = true, in_range = true, same_support = true;
  for (int t = 0; t < 20; ++t) {
    const auto s = oracle::random_micro_scene(rng, 8, 5);
    const auto m = build_affinity_matrix(s.cloud, s.partition, s.adjacency, s.views);
    const auto ref = oracle::naive_affinity(s.cloud, s.partition, s.adjacency, s.views, kDefaultDepthTolerance);
    same_support &= m.entries().size() == ref.size();
    for (const auto& [key, pv] : ref) {
      const auto* e = m.find(key.first, key.second);
      if (!e || e->value.has_value() != pv.value.has_value()) {
        same_support = false;
        continue;
      }
      worst = std::max(worst, std::abs(e->weight_total - pv.weight));
      if (pv.value) worst = std::max(worst, std::abs(*e->value - *pv.value));
      symmetric &= m.find(key.second, key.first) == e &&
                   m.affinity(key.first, key.second) == m.affinity(key.second, key.first);
      if (e->value) in_range &= *e->value >= 0.0 && *e->value <= 1.0;
    }
  }
  Outcome o;
  o.pass = same_support && worst <= 1e-12 && symmetric && in_range;
  o.detail = fmt("20 micro-scenes, max deviation %.2e, symmetric %s, in [0,1] %s", worst,
                 symmetric ? "yes" : "no", in_range ? "yes" : "no");
  return o;
}

Outcome criterion_examples() {
  Outcome o;
  // Path 1 - 0 - 2: member 0 at d = 1 (N = 10, A = 1), member 1 at d = 2 (N = 10, A = 0).
  oracle::DenseGraph g;
  g.sizes = {10, 10, 7};
  g.adj = {{false, true, true}, {true, false, false}, {true, false, false}};
  g.aff.assign(3, std::vector<std::optional<double>>(3));
  g.aff[0][2] = g.aff[2][0] = 1.0;
  g.aff[1][2] = g.aff[2][1] = 0.0;
  g.aff[0][1] = g.aff[1][0] = 0.5;
  const auto graph = oracle::to_growth_graph(g);
  const std::vector<Index> region{0, 1}, single{0};
  const double two_thirds = *region_node_affinity(region, 2, graph, 0.5);
  const double reduced = *region_node_affinity(single, 2, graph, 0.5);
  // Path 0 - 1 - 2 - 3: node 3 is three hops from 0.
  oracle::DenseGraph p;
  p.sizes = {5, 5, 5, 5};
  p.adj.assign(4, std::vector<bool>(4, false));
  p.aff.assign(4, std::vector<std::optional<double>>(4));
  for (int i = 0; i < 3; ++i) p.adj[i][i + 1] = p.adj[i + 1][i] = true;
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {2, 3}, {0, 2}, {1, 3}}) p.aff[i][j] = p.aff[j][i] = 0.9;
  const bool cutoff = !region_node_affinity(single, 3, oracle::to_growth_graph(p), 0.5).has_value();

  // Table leg: ground - leg tip - table top.
  oracle::DenseGraph leg;
  leg.sizes = {1000, 5, 800};
  leg.adj = {{false, true, false}, {true, false, true}, {false, true, false}};
  leg.aff.assign(3, std::vector<std::optional<double>>(3));
  leg.aff[0][1] = leg.aff[1][0] = 0.95;
  leg.aff[1][2] = leg.aff[2][1] = 0.95;
  leg.aff[0][2] = leg.aff[2][0] = 0.0;
  const auto lg = oracle::to_growth_graph(leg);
  const auto multi = grow_stage(lg, 0.9, 0.5, MergeCriterion::kMultiLevel);
  const auto pair = grow_stage(lg, 0.9, 0.5, MergeCriterion::kPairwise);
  const bool blocked = multi.instance_id[0] != multi.instance_id[2];
  const bool merged = pair.num_regions() == 1;

  const double err = std::max(std::abs(two_thirds - 2.0 / 3.0), std::abs(reduced - 1.0));
  o.pass = err <= 1e-12 && cutoff && blocked && merged;
  o.detail = fmt("2/3 example %.15f (err %.1e), d>=3 cutoff %s, table leg: multi-level %s, pairwise %s", two_thirds,
                 err, cutoff ? "yes" : "no", blocked ? "blocked" : "MERGED", merged ? "merged" : "NOT merged");
  return o;
}

Outcome algorithm_fidelity() {
  std::mt19937_64 rng(kSeed);
  int equal = 0;
  for (int t = 0; t < 20; ++t) {
    const auto g = oracle::random_dense_graph(rng, 12);
    const auto got = grow_stage(oracle::to_growth_graph(g), 0.7, 0.5);
    equal += oracle::same_partition(got.instance_id, oracle::algorithm1(g, 0.7, 0.5));
  }
  Outcome o;
  o.pass = equal == 20;
  o.detail = fmt("%d/20 random graphs match the transcription", equal);
  return o;
}

Outcome ablation_trend(std::vector<APReport>& rows) {
  const auto scenes = benchmark({0.3, 0.2, 2, 0}, 24);
  std::vector<std::vector<APReport>> per(5);
  for (const auto& s : scenes) {
    const auto r = ablate_scene(s, {}, 0.7);
    for (std::size_t k = 0; k < r.size(); ++k) per[k].push_back(r[k]);
  }
  for (auto& p : per) rows.push_back(mean_report(p));
  const double point = rows[0].ap, sp = rows[1].ap, multi = rows[2].ap, prog = rows[3].ap, full = rows[4].ap;
  Outcome o;
  o.pass = full >= multi && full >= prog && sp >= point && multi >= point && prog >= point && full >= point;
  o.detail = fmt("AP point %.1f, sp %.1f, +multi %.1f, +prog %.1f, full %.1f; margins full-multi %+.1f, "
                 "full-prog %+.1f, min(sp variants)-point %+.1f",
                 100 * point, 100 * sp, 100 * multi, 100 * prog, 100 * full, 100 * (full - multi),
                 100 * (full - prog), 100 * (std::min({sp, multi, prog, full}) - point));
  return o;
}

Outcome views_trend() {
  const auto specs = benchmark_specs(kSeed, 5, 8, 48);
  std::vector<double> ap;
  for (double f : {0.01, 0.05, 0.2}) {
    std::vector<APReport> reports;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto bundle = make_synth_bundle(specs[i], {0.3, 0.2, 2, kSeed * 1000 + i});
      reports.push_back(*run_pipeline(scene_from_bundle(bundle, f), {}).report);
    }
    ap.push_back(mean_report(reports).ap);
  }
  Outcome o;
  o.pass = ap[2] >= ap[1] && ap[1] >= ap[0] - 0.02;
  o.detail = fmt("AP at 1%% %.3f, 5%% %.3f, 20%% %.3f", ap[0], ap[1], ap[2]);
  return o;
}

Outcome threshold_trend() {
  auto count_regions = [](const std::vector<Scene>& scenes, std::vector<double> thresholds,
                          double& gt_mean) {
    PipelineConfig c;
    c.growth.thresholds = std::move(thresholds);
    double pred = 0, gt = 0;
    for (const auto& s : scenes) {
      const auto r = run_pipeline(s, c);
      pred += static_cast<double>(std::set<std::int64_t>(r.instances.point_ids.begin(),
                                                          r.instances.point_ids.end()).size());
      std::set<std::int64_t> g(s.gt.begin(), s.gt.end());
      g.erase(0);
      gt += static_cast<double>(g.size());
    }
    gt_mean = gt / static_cast<double>(scenes.size());
    return pred / static_cast<double>(scenes.size());
  };
  double gt_merge = 0, gt_split = 0;
  const auto merge = benchmark({0.3, 0.0, 0, 0}, 24);
  const double low = count_regions(merge, {0.5}, gt_merge);
  const double prog_m = count_regions(merge, kFineSchedule, gt_merge);
  const auto split = benchmark({0.0, 0.3, 0, 0}, 24);
  const double high = count_regions(split, {0.9}, gt_split);
  const double prog_s = count_regions(split, kFineSchedule, gt_split);
  Outcome o;
  o.pass = low < gt_merge && low < prog_m && high > gt_split && high > prog_s;
  o.detail = fmt("merge noise: fixed 0.5 %.1f regions vs progressive %.1f, GT %.1f; split noise: fixed 0.9 %.1f "
                 "vs progressive %.1f, GT %.1f",
                 low, prog_m, gt_merge, high, prog_s, gt_split);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome invariant_suites() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* name) {
    if (!ok) failed.push_back(name);
  };
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(-1, 1);

  // Projection round trip.
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const auto s = oracle::random_micro_scene(rng, 8, 5);
    for (const auto& v : s.views) {
      const auto proj = project_points(s.cloud, v);
      for (Index i = 0; i < s.cloud.size(); ++i) {
        if (proj.cam_depth[i] <= 0) continue;
        const auto back = back_project(v, proj.pixel(0, i), proj.pixel(1, i), proj.cam_depth[i]);
        worst = std::max(worst, (back - s.cloud.positions.col(i)).norm());
      }
    }
  }
  expect(worst <= 1e-6, "projection round trip");

  // Visibility grows with the depth tolerance.
  bool monotone = true;
  for (int t = 0; t < 20; ++t) {
    const auto s = oracle::random_micro_scene(rng, 8, 5);
    for (const auto& v : s.views) {
      std::vector<std::uint8_t> prev(static_cast<std::size_t>(s.cloud.size()), 0);
      for (double tol : {0.0, 0.005, 0.01, 0.05, 0.2, 1.0}) {
        const auto vis = project_points(s.cloud, v, tol).visible;
        for (std::size_t i = 0; i < vis.size(); ++i) monotone &= prev[i] <= vis[i];
        prev = vis;
      }
    }
  }
  expect(monotone, "visibility tolerance monotonicity");

  // Partition totality and monotone coarsening on a noisy scene.
  const auto noisy = scene_from_bundle(make_synth_bundle(random_scene_spec(kSeed, 6, 12), {0.3, 0.2, 2, kSeed}));
  PipelineConfig cluttered;
  cluttered.growth.thresholds = kClutteredSchedule;
  const auto over = oversegment_scene(noisy, cluttered);
  bool total = true;
  for (Index l : over.partition.label) total &= l >= 0 && l < over.partition.num_superpoints();
  Index members = 0;
  for (const auto& m : over.partition.members) members += static_cast<Index>(m.size());
  total &= members == noisy.cloud.size();
  const auto matrix = scene_affinity(noisy, over, cluttered);
  std::vector<RegionLabeling> stages;
  const auto final = progressive_grow(GrowthGraph::from_matrix(over.partition, over.adjacency, matrix),
                                      cluttered.growth, &stages);
  for (Index id : final.instance_id) total &= id >= 1;
  expect(total, "partition totality");
  bool coarsening = true;
  for (std::size_t s = 1; s < stages.size(); ++s) {
    std::map<Index, Index> to;
    for (std::size_t i = 0; i < stages[s].instance_id.size(); ++i) {
      auto [it, ins] = to.try_emplace(stages[s - 1].instance_id[i], stages[s].instance_id[i]);
      coarsening &= it->second == stages[s].instance_id[i];
    }
  }
  expect(coarsening, "monotone coarsening");

  // AP ordering.
  bool ordered = true;
  for (int t = 0; t < 200; ++t) {
    std::vector<std::vector<Index>> gt;
    Index at = 0;
    for (int k = 0; k < 4; ++k) {
      std::vector<Index> g;
      for (int n = 0; n < 10 + t % 7; ++n) g.push_back(at++);
      gt.push_back(g);
    }
    std::vector<InstancePrediction> preds;
    std::uniform_int_distribution<Index> pos(0, at - 1);
    for (int k = 0; k < 4; ++k) {
      Index b = pos(rng), e = pos(rng);
      if (b > e) std::swap(b, e);
      std::vector<Index> pts;
      for (Index i = b; i <= e; ++i) pts.push_back(i);
      preds.push_back({pts, 0.5 + 0.5 * u(rng)});
    }
    const auto r = average_precision(preds, gt);
    ordered &= r.ap <= r.ap50 + 1e-12 && r.ap50 <= r.ap25 + 1e-12;
  }
  expect(ordered, "AP <= AP50 <= AP25");

  // Determinism across runs and thread counts.
  std::vector<std::string> outputs;
  for (int threads : {1, 1, 4}) {
    set_thread_count(threads);
    const auto r = run_pipeline(noisy, cluttered);
    const auto dir = fs::temp_directory_path() / ("spgrow_accept_" + std::to_string(outputs.size()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_instances(dir.string(), r.instances);
    save_affinity((dir / "affinity.txt").string(), r.affinity);
    outputs.push_back(slurp(dir / "instances.txt") + slurp(dir / "instances.json") +
                      slurp(dir / "regions.json") + slurp(dir / "affinity.txt"));
  }
  set_thread_count(0);
  expect(outputs[0] == outputs[1] && outputs[0] == outputs[2], "determinism");

  Outcome o;
  o.pass = failed.empty();
  o.detail = failed.empty() ? fmt("6 suites passed (round trip max %.1e m)", worst) : "failed:";
  for (const auto& f : failed) o.detail += " " + f + ";";
  return o;
}

Outcome query_exactness() {
  int names = 0, exact = 0;
  for (std::uint64_t seed : {kSeed, kSeed + 1, kSeed + 2}) {
    const auto spec = random_scene_spec(seed, 8, 16);
    const auto bundle = make_synth_bundle(spec);
    const auto scene = scene_from_bundle(bundle);
    const auto result = run_pipeline(scene, {});
    std::vector<SemanticFrame> frames;
    for (std::size_t v = 0; v < scene.views.size(); ++v) frames.push_back({&scene.views[v], scene.semantic[v]});
    const auto labels = backproject_semantics(frames, scene.cloud);
    for (std::size_t k = 0; k < spec.objects.size(); ++k) {
      ++names;
      const auto q = query_instances(result.instances.point_ids, labels, scene.labels, spec.objects[k].name);
      if (q.instances.size() != 1) continue;
      // The returned instance must be the object: identical points wherever
      // ground truth is annotated.
      const auto id = q.instances.front().first;
      const auto object = static_cast<std::int64_t>(k) + 2;
      bool same = true;
      for (std::size_t i = 0; i < scene.gt.size(); ++i)
        if (scene.gt[i] != 0) same &= (result.instances.point_ids[i] == id) == (scene.gt[i] == object);
      exact += same;
    }
  }
  Outcome o;
  o.pass = exact == names;
  o.detail = fmt("%d/%d object names return exactly their object (precision = recall = %.3f)", exact, names,
                 static_cast<double>(exact) / names);
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* what, const Outcome& o) {
    std::printf("%s criterion %d: %s: %s\n", o.pass ? "PASS" : "FAIL", n, what, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  try {
    report(1, "oracle end-to-end", oracle_end_to_end());
    report(2, "affinity equals brute force", affinity_equivalence());
    report(3, "multi-level criterion examples", criterion_examples());
    report(4, "region growing fidelity", algorithm_fidelity());
    std::vector<APReport> rows;
    const auto trend = ablation_trend(rows);
    const std::vector<std::string> names{"point-level", "superpoints", "superpoints + multi-level",
                                         "superpoints + progressive", "full"};
    std::vector<std::pair<std::string, APReport>> table;
    for (std::size_t k = 0; k < rows.size(); ++k) table.emplace_back(names[k], rows[k]);
    std::printf("%s", report_table(table).c_str());
    report(5, "ablation trend", trend);
    report(6, "view fraction trend", views_trend());
    report(7, "threshold trend", threshold_trend());
    report(8, "invariant suites", invariant_suites());
    report(9, "text queries", query_exactness());
  } catch (const std::exception& e) {
    std::printf("FAIL: unexpected error: %s\n", e.what());
    return 2;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
