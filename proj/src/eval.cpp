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

#include "spgrow/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace spgrow {

std::vector<double> default_iou_thresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

double mask_iou(std::span<const Index> a, std::span<const Index> b) {
  std::size_t inter = 0;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

PrecisionRecallCurve curve_at(double threshold, std::span<const std::size_t> ranked,
                              const std::vector<std::vector<double>>& iou, std::size_t num_gt) {
  PrecisionRecallCurve c;
  c.iou_threshold = threshold;
  std::vector<bool> taken(num_gt, false);
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    const auto& row = iou[ranked[rank]];
    std::size_t best = num_gt;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < num_gt; ++g) {
      if (taken[g] || row[g] < threshold) continue;
      if (row[g] > best_iou) {
        best = g;
        best_iou = row[g];
      }
    }
    if (best < num_gt) {
      taken[best] = true;
      ++tp;
    }
    c.precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
    c.recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
  }
  // Step integration under the precision envelope.
  double envelope = 0.0, ap = 0.0;
  std::vector<double> env(c.precision.size());
  for (std::size_t k = c.precision.size(); k-- > 0;) {
    envelope = std::max(envelope, c.precision[k]);
    env[k] = envelope;
  }
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < env.size(); ++k) {
    ap += (c.recall[k] - prev_recall) * env[k];
    prev_recall = c.recall[k];
  }
  c.ap = ap;
  return c;
}

}  // namespace

APReport average_precision(std::span<const InstancePrediction> predictions,
                           std::span<const std::vector<Index>> ground_truth,
                           std::span<const double> iou_thresholds) {
  APReport report;
  report.num_predictions = predictions.size();
  report.num_ground_truth = ground_truth.size();
  if (ground_truth.empty()) {
    report.skipped = true;
    return report;
  }
  std::vector<double> thresholds(iou_thresholds.begin(), iou_thresholds.end());
  if (thresholds.empty()) thresholds = default_iou_thresholds();

  // IoU via a point -> ground truth lookup.
  std::unordered_map<Index, std::size_t> gt_of_point;
  for (std::size_t g = 0; g < ground_truth.size(); ++g)
    for (Index p : ground_truth[g]) gt_of_point[p] = g;
  std::vector<std::vector<double>> iou(predictions.size(),
                                       std::vector<double>(ground_truth.size(), 0.0));
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    std::unordered_map<std::size_t, std::size_t> inter;
    for (Index p : predictions[k].points) {
      if (auto it = gt_of_point.find(p); it != gt_of_point.end()) ++inter[it->second];
    }
    for (const auto& [g, n] : inter) {
      const std::size_t uni = predictions[k].points.size() + ground_truth[g].size() - n;
      iou[k][g] = static_cast<double>(n) / static_cast<double>(uni);
    }
  }

  std::vector<std::size_t> ranked(predictions.size());
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });

  double sum = 0.0;
  for (double t : thresholds) {
    report.curves.push_back(curve_at(t, ranked, iou, ground_truth.size()));
    sum += report.curves.back().ap;
  }
  report.ap = sum / static_cast<double>(thresholds.size());
  report.ap50 = curve_at(0.5, ranked, iou, ground_truth.size()).ap;
  auto c25 = curve_at(0.25, ranked, iou, ground_truth.size());
  report.ap25 = c25.ap;
  report.curves.push_back(std::move(c25));
  return report;
}

EvalInputs make_eval_inputs(std::span<const std::int64_t> predicted_ids,
                            const std::map<std::int64_t, double>& confidence,
                            std::span<const std::int64_t> gt_ids) {
  require(predicted_ids.size() == gt_ids.size(),
          "prediction has " + std::to_string(predicted_ids.size()) + " points, ground truth " +
              std::to_string(gt_ids.size()));
  std::map<std::int64_t, std::vector<Index>> pred, gt;
  for (std::size_t p = 0; p < gt_ids.size(); ++p) {
    if (gt_ids[p] == 0) continue;
    gt[gt_ids[p]].push_back(static_cast<Index>(p));
    if (predicted_ids[p] != 0) pred[predicted_ids[p]].push_back(static_cast<Index>(p));
  }
  EvalInputs in;
  for (auto& [id, pts] : pred) {
    auto it = confidence.find(id);
    in.predictions.push_back({std::move(pts), it == confidence.end() ? 1.0 : it->second});
  }
  for (auto& [id, pts] : gt) in.ground_truth.push_back(std::move(pts));
  return in;
}

APReport evaluate_instances(std::span<const std::int64_t> predicted_ids,
                            const std::map<std::int64_t, double>& confidence,
                            std::span<const std::int64_t> gt_ids) {
  const auto in = make_eval_inputs(predicted_ids, confidence, gt_ids);
  return average_precision(in.predictions, in.ground_truth);
}

APReport mean_report(std::span<const APReport> scenes) {
  APReport out;
  std::size_t n = 0;
  for (const auto& r : scenes) {
    if (r.skipped) continue;
    out.ap += r.ap;
    out.ap50 += r.ap50;
    out.ap25 += r.ap25;
    out.num_predictions += r.num_predictions;
    out.num_ground_truth += r.num_ground_truth;
    ++n;
  }
  if (n == 0) {
    out.skipped = true;
    return out;
  }
  out.ap /= static_cast<double>(n);
  out.ap50 /= static_cast<double>(n);
  out.ap25 /= static_cast<double>(n);
  return out;
}

nlohmann::json report_to_json(const APReport& report, bool with_curves) {
  nlohmann::json j;
  j["skipped"] = report.skipped;
  j["ap"] = report.ap;
  j["ap50"] = report.ap50;
  j["ap25"] = report.ap25;
  j["num_predictions"] = report.num_predictions;
  j["num_ground_truth"] = report.num_ground_truth;
  if (with_curves) {
    for (const auto& c : report.curves) {
      j["curves"].push_back({{"iou_threshold", c.iou_threshold},
                             {"ap", c.ap},
                             {"precision", c.precision},
                             {"recall", c.recall}});
    }
  }
  return j;
}

std::string report_table(std::span<const std::pair<std::string, APReport>> rows) {
  std::size_t width = 6;
  for (const auto& [name, r] : rows) width = std::max(width, name.size());
  std::ostringstream out;
  char buf[128];
  out << std::string(width, ' ');
  std::snprintf(buf, sizeof(buf), "  %6s %6s %6s\n", "AP", "AP50", "AP25");
  out << buf;
  for (const auto& [name, r] : rows) {
    out << name << std::string(width - name.size(), ' ');
    if (r.skipped) {
      out << "  (no ground truth)\n";
      continue;
    }
    std::snprintf(buf, sizeof(buf), "  %6.1f %6.1f %6.1f\n", 100 * r.ap, 100 * r.ap50,
                  100 * r.ap25);
    out << buf;
  }
  return out.str();
}

}  // namespace spgrow
