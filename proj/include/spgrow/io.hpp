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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spgrow/geometry.hpp"

namespace spgrow {

using Image16 =
    Eigen::Array<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// PLY with float/double x y z, optional nx ny nz and uchar red green blue.
// ascii, binary_little_endian and binary_big_endian are read; output is
// binary_little_endian unless `ascii` is set.
PointCloud read_ply(const std::string& path);
void write_ply(const std::string& path, const PointCloud& cloud, bool ascii = false);

// Single-channel PNG. read_png_gray accepts 8- and 16-bit input; reading with
// require_16bit rejects 8-bit files.
Image16 read_png_gray(const std::string& path, bool require_16bit);
void write_png16(const std::string& path, const Image16& image);

// 16-bit millimeter depth PNG, 0 = invalid.
DepthImage read_depth_png(const std::string& path);
void write_depth_png(const std::string& path, const DepthImage& depth);

// "fx fy cx cy width height"
Intrinsics read_intrinsics(const std::string& path);
void write_intrinsics(const std::string& path, const Intrinsics& k);

// Row-major 4x4 text matrix.
Eigen::Matrix4d read_matrix4(const std::string& path);
void write_matrix4(const std::string& path, const Eigen::Matrix4d& m);

// One integer per line.
std::vector<std::int64_t> read_id_list(const std::string& path);
void write_id_list(const std::string& path, const std::vector<std::int64_t>& ids);

std::string read_text_file(const std::string& path);

}  // namespace spgrow
