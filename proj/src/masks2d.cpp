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

#include "spgrow/masks2d.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spgrow/io.hpp"

namespace spgrow {

MaskImage resolve_overlaps(const RawMaskSet& raw) {
  MaskImage out;
  if (raw.masks.empty()) return out;
  const auto rows = raw.masks.front().rows();
  const auto cols = raw.masks.front().cols();
  for (const auto& m : raw.masks) {
    require(m.rows() == rows && m.cols() == cols, "raw masks differ in size");
  }
  require(raw.scores.empty() || raw.scores.size() == raw.masks.size(),
          "score count does not match mask count");

  // Priority: score if given, else area; ties to the lower index.
  std::vector<double> priority(raw.masks.size());
  for (std::size_t k = 0; k < raw.masks.size(); ++k) {
    priority[k] = raw.scores.empty() ? static_cast<double>(raw.masks[k].count()) : raw.scores[k];
    require(std::isfinite(priority[k]), "non-finite mask score");
  }
  std::vector<std::size_t> order(raw.masks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return priority[a] > priority[b]; });

  // Paint from highest priority down; a pixel keeps the first owner.
  LabelImage owner = LabelImage::Constant(rows, cols, -1);
  for (std::size_t k : order) {
    const auto& m = raw.masks[k];
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        if (m(r, c) && owner(r, c) < 0) owner(r, c) = static_cast<std::int32_t>(k);
  }

  std::vector<std::int32_t> area(raw.masks.size(), 0);
  for (Eigen::Index i = 0; i < owner.size(); ++i)
    if (owner.data()[i] >= 0) ++area[static_cast<std::size_t>(owner.data()[i])];

  std::vector<std::int32_t> relabel(raw.masks.size(), 0);
  std::int32_t next = 1;
  for (std::size_t k : order) {
    if (area[k] == 0) continue;
    relabel[k] = next;
    if (!raw.scores.empty()) out.scores[next] = raw.scores[k];
    ++next;
  }
  out.num_masks = next - 1;
  out.labels = LabelImage::Zero(rows, cols);
  for (Eigen::Index i = 0; i < owner.size(); ++i) {
    const auto k = owner.data()[i];
    if (k >= 0) out.labels.data()[i] = relabel[static_cast<std::size_t>(k)];
  }
  return out;
}

MaskImage densify(const LabelImage& labels) {
  require((labels >= 0).all(), "mask labels must be non-negative");
  std::vector<std::int32_t> values(labels.data(), labels.data() + labels.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  values.erase(std::remove(values.begin(), values.end(), 0), values.end());
  MaskImage out;
  out.labels.resize(labels.rows(), labels.cols());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const auto v = labels.data()[i];
    out.labels.data()[i] =
        v == 0 ? 0
               : static_cast<std::int32_t>(std::lower_bound(values.begin(), values.end(), v) -
                                           values.begin()) + 1;
  }
  out.num_masks = static_cast<std::int32_t>(values.size());
  return out;
}

MaskImage load_mask_image(const std::string& path) {
  return densify(read_png_gray(path, true).cast<std::int32_t>());
}

void save_mask_image(const std::string& path, const MaskImage& masks) {
  require((masks.labels <= 65535).all(), path + ": too many masks for a 16-bit PNG");
  write_png16(path, masks.labels.cast<std::uint16_t>());
}

RawMaskSet load_binary_masks(const std::string& dir) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), "mask directory '" + dir + "' does not exist");
  RawMaskSet raw;
  for (std::size_t k = 0;; ++k) {
    const fs::path p = fs::path(dir) / ("mask_" + std::to_string(k) + ".png");
    if (!fs::exists(p)) break;
    raw.masks.push_back(read_png_gray(p.string(), false) != 0);
  }
  const fs::path scores = fs::path(dir) / "scores.txt";
  if (fs::exists(scores)) {
    std::istringstream in(read_text_file(scores.string()));
    double s;
    while (in >> s) raw.scores.push_back(s);
    require(in.eof(), scores.string() + ": expected one float per line");
    require(raw.scores.size() == raw.masks.size(),
            scores.string() + ": " + std::to_string(raw.scores.size()) + " scores for " +
                std::to_string(raw.masks.size()) + " masks");
  }
  return raw;
}

}  // namespace spgrow
