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

#include "spgrow/openvocab.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "spgrow/io.hpp"
#include "spgrow/knn.hpp"
#include "spgrow/parallel.hpp"

namespace spgrow {

LabelTable read_label_table(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  require(j.is_object(), path + ": expected an object {\"1\": \"name\", ...}");
  LabelTable table;
  for (const auto& [key, value] : j.items()) {
    require(value.is_string(), path + ": label names must be strings");
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(key, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == key.size() && id > 0, path + ": label key '" + key + "' is not a positive integer");
    table[id] = value.get<std::string>();
  }
  return table;
}

void write_label_table(const std::string& path, const LabelTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, name] : table) j[std::to_string(id)] = name;
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

std::vector<std::int32_t> backproject_semantics(std::span<const SemanticFrame> frames,
                                                const PointCloud& cloud, double radius) {
  const KdTree tree(cloud.positions);
  std::vector<std::vector<std::pair<Index, std::int32_t>>> votes(frames.size());
  parallel_for(frames.size(), [&](std::size_t f) {
    const auto& frame = frames[f];
    const CameraView& view = *frame.view;
    require(frame.labels.rows() == view.depth.rows() && frame.labels.cols() == view.depth.cols(),
            "frame " + view.frame_id + ": semantic mask size does not match depth");
    const Eigen::Isometry3d cam_to_world = view.world_to_camera.inverse();
    for (Eigen::Index r = 0; r < frame.labels.rows(); ++r) {
      for (Eigen::Index c = 0; c < frame.labels.cols(); ++c) {
        const std::int32_t label = frame.labels(r, c);
        const double z = view.depth(r, c);
        if (label <= 0 || !(z > 0)) continue;
        const Eigen::Vector3d world =
            cam_to_world * view.intrinsics.unproject(c + 0.5, r + 0.5, z);
        if (auto hit = tree.nearest(world, radius)) votes[f].emplace_back(*hit, label);
      }
    }
  });

  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> tally(
      static_cast<std::size_t>(cloud.size()));
  for (const auto& frame_votes : votes) {
    for (const auto& [p, label] : frame_votes) {
      auto& t = tally[p];
      auto it = std::find_if(t.begin(), t.end(), [&](const auto& e) { return e.first == label; });
      if (it == t.end()) t.emplace_back(label, 1);
      else ++it->second;
    }
  }
  std::vector<std::int32_t> out(tally.size(), 0);
  for (std::size_t p = 0; p < tally.size(); ++p) {
    std::int32_t best = 0, best_count = 0;
    for (const auto& [label, count] : tally[p]) {
      if (count > best_count || (count == best_count && label < best)) {
        best = label;
        best_count = count;
      }
    }
    out[p] = best;
  }
  return out;
}

QueryResult query_instances(std::span<const std::int64_t> point_instances,
                            std::span<const std::int32_t> point_labels,
                            const LabelTable& table, const std::string& query,
                            double threshold) {
  require(point_instances.size() == point_labels.size(),
          "instance and semantic label arrays differ in length");
  QueryResult result;
  result.query = query;
  std::vector<std::int32_t> ids;
  for (const auto& [id, name] : table)
    if (name == query) ids.push_back(id);
  if (ids.empty()) return result;

  std::map<std::int64_t, std::pair<std::size_t, std::size_t>> counts;  // (hits, size)
  for (std::size_t p = 0; p < point_instances.size(); ++p) {
    if (point_instances[p] == 0) continue;
    auto& c = counts[point_instances[p]];
    ++c.second;
    if (std::find(ids.begin(), ids.end(), point_labels[p]) != ids.end()) ++c.first;
  }
  for (const auto& [inst, c] : counts) {
    const double overlap = static_cast<double>(c.first) / static_cast<double>(c.second);
    if (overlap > threshold) result.instances.emplace_back(inst, overlap);
  }
  std::stable_sort(result.instances.begin(), result.instances.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return result;
}

nlohmann::json query_to_json(const QueryResult& result) {
  nlohmann::json j;
  j["query"] = result.query;
  j["instances"] = nlohmann::json::array();
  for (const auto& [id, overlap] : result.instances) {
    j["instances"].push_back({{"id", id}, {"overlap", overlap}});
  }
  return j;
}

}  // namespace spgrow
