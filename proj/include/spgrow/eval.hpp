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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spgrow/common.hpp"

namespace spgrow {

struct InstancePrediction {
  std::vector<Index> points;  // ascending
  double confidence = 1.0;
};

struct PrecisionRecallCurve {
  double iou_threshold = 0.0;
  std::vector<double> precision;  // one entry per ranked prediction
  std::vector<double> recall;
  double ap = 0.0;
};

struct APReport {
  bool skipped = false;  // no ground truth instances
  double ap = 0.0;       // mean over 0.50:0.05:0.95
  double ap50 = 0.0;
  double ap25 = 0.0;
  std::size_t num_predictions = 0;
  std::size_t num_ground_truth = 0;
  std::vector<PrecisionRecallCurve> curves;
};

// 0.50, 0.55, ..., 0.95
std::vector<double> default_iou_thresholds();

// |a ∩ b| / |a ∪ b| for ascending index lists; 0 when both are empty.
double mask_iou(std::span<const Index> a, std::span<const Index> b);

// Class-agnostic AP. Predictions are ranked by descending confidence (stable
// on input order); each takes the unmatched ground truth instance of highest
// IoU >= t. The curve is integrated stepwise over recall under the
// precision envelope. `iou_thresholds` defaults to 0.50:0.05:0.95; AP50 and
// AP25 are always reported.
APReport average_precision(std::span<const InstancePrediction> predictions,
                           std::span<const std::vector<Index>> ground_truth,
                           std::span<const double> iou_thresholds = {});

// Per-point instance ids (0 = none) to evaluation inputs. Points whose
// ground truth id is 0 are dropped from both sides; predictions that become
// empty are discarded.
struct EvalInputs {
  std::vector<InstancePrediction> predictions;
  std::vector<std::vector<Index>> ground_truth;
};
EvalInputs make_eval_inputs(std::span<const std::int64_t> predicted_ids,
                            const std::map<std::int64_t, double>& confidence,
                            std::span<const std::int64_t> gt_ids);

APReport evaluate_instances(std::span<const std::int64_t> predicted_ids,
                            const std::map<std::int64_t, double>& confidence,
                            std::span<const std::int64_t> gt_ids);

// Mean of AP, AP50, AP25 over non-skipped scenes.
APReport mean_report(std::span<const APReport> scenes);

nlohmann::json report_to_json(const APReport& report, bool with_curves = false);
std::string report_table(std::span<const std::pair<std::string, APReport>> rows);

}  // namespace spgrow
