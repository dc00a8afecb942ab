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
#include <vector>

#include <Eigen/Core>

#include "spgrow/common.hpp"

namespace spgrow {

using LabelImage =
    Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-pixel instance labels of one frame: 0 is background, 1..num_masks are
// masks. Dense after normalization.
struct MaskImage {
  LabelImage labels;
  std::int32_t num_masks = 0;
  std::map<std::int32_t, double> scores;

  int width() const { return static_cast<int>(labels.cols()); }
  int height() const { return static_cast<int>(labels.rows()); }
};

// Possibly overlapping binary masks with a quality score each, as dumped by
// an automatic mask generator.
struct RawMaskSet {
  std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      masks;
  std::vector<double> scores;  // empty: rank by area
};

// One label per covered pixel: the highest-scoring covering mask wins, ties
// go to the lower mask index. Labels are renumbered 1..K by descending score
// and masks left without pixels are dropped.
MaskImage resolve_overlaps(const RawMaskSet& raw);

// Relabels non-zero values to 1..K in ascending order of the original value.
// Pixels sharing a label before share one after.
MaskImage densify(const LabelImage& labels);

MaskImage load_mask_image(const std::string& path);
void save_mask_image(const std::string& path, const MaskImage& masks);

// `<dir>/mask_<k>.png` binary masks plus `<dir>/scores.txt`, k = 0, 1, ...
RawMaskSet load_binary_masks(const std::string& dir);

}  // namespace spgrow
