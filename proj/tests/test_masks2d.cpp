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

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "spgrow/io.hpp"
#include "spgrow/masks2d.hpp"

using namespace spgrow;
namespace fs = std::filesystem;

namespace {

using BoolImage = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / "spgrow_test_masks";
  fs::create_directories(d);
  return d;
}

BoolImage rect(int rows, int cols, int r0, int c0, int r1, int c1) {
  BoolImage m = BoolImage::Constant(rows, cols, false);
  m.block(r0, c0, r1 - r0, c1 - c0).setConstant(true);
  return m;
}

void write_png8(const std::string& path, const Eigen::Array<std::uint8_t, -1, -1, Eigen::RowMajor>& img) {
  FILE* f = std::fopen(path.c_str(), "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols()), static_cast<png_uint_32>(img.rows()),
               8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    png_write_row(png, const_cast<std::uint8_t*>(img.data() + r * img.cols()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

}  // namespace

TEST_CASE("disjoint masks both survive") {
  RawMaskSet raw;
  raw.masks = {rect(10, 10, 0, 0, 3, 3), rect(10, 10, 5, 5, 8, 8)};
  raw.scores = {0.5, 0.7};
  const auto m = resolve_overlaps(raw);
  CHECK(m.num_masks == 2);
  CHECK(m.labels(1, 1) == 2);  // lower score gets the later label
  CHECK(m.labels(6, 6) == 1);
  CHECK((m.labels == 1).count() == 9);
  CHECK((m.labels == 2).count() == 9);
  CHECK(m.scores.at(1) == 0.7);
}

TEST_CASE("contained higher-score mask keeps its pixels, outer keeps the ring") {
  RawMaskSet raw;
  raw.masks = {rect(10, 10, 3, 3, 6, 6), rect(10, 10, 1, 1, 9, 9)};
  raw.scores = {0.9, 0.8};
  const auto m = resolve_overlaps(raw);
  CHECK(m.num_masks == 2);
  CHECK((m.labels == 1).count() == 9);
  CHECK((m.labels == 2).count() == 64 - 9);
  CHECK(m.labels(0, 0) == 0);
}

TEST_CASE("resolve_overlaps matches a per-pixel argmax oracle") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> rr(0, 39), cr(0, 49);
  std::uniform_real_distribution<double> sc(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    RawMaskSet raw;
    for (int k = 0; k < 20; ++k) {
      int r0 = rr(rng), r1 = rr(rng), c0 = cr(rng), c1 = cr(rng);
      if (r0 > r1) std::swap(r0, r1);
      if (c0 > c1) std::swap(c0, c1);
      raw.masks.push_back(rect(40, 50, r0, c0, r1 + 1, c1 + 1));
      // Quantized scores force ties.
      raw.scores.push_back(std::round(sc(rng) * 5) / 5);
    }
    const auto m = resolve_overlaps(raw);
    std::map<int, int> label_of_mask;
    std::size_t covered = 0;
    for (int r = 0; r < 40; ++r)
      for (int c = 0; c < 50; ++c) {
        int best = -1;
        for (int k = 0; k < 20; ++k)
          if (raw.masks[k](r, c) && (best < 0 || raw.scores[k] > raw.scores[best])) best = k;
        if (best < 0) {
          CHECK(m.labels(r, c) == 0);
          continue;
        }
        ++covered;
        auto [it, inserted] = label_of_mask.try_emplace(best, m.labels(r, c));
        CHECK(it->second == m.labels(r, c));
        CHECK(m.scores.at(m.labels(r, c)) == raw.scores[best]);
      }
    // Each label is one mask, areas add up, scores descend with the label.
    CHECK(static_cast<int>(label_of_mask.size()) == m.num_masks);
    std::size_t area = 0;
    for (int l = 1; l <= m.num_masks; ++l) area += (m.labels == l).count();
    CHECK(area == covered);
    for (int l = 2; l <= m.num_masks; ++l) CHECK(m.scores.at(l - 1) >= m.scores.at(l));
  }
}

TEST_CASE("missing scores fall back to area order") {
  RawMaskSet raw;
  raw.masks = {rect(10, 10, 0, 0, 2, 2), rect(10, 10, 0, 0, 5, 5)};
  const auto m = resolve_overlaps(raw);
  CHECK(m.labels(0, 0) == 1);
  CHECK((m.labels == 1).count() == 25);
  CHECK(m.num_masks == 1);
}

TEST_CASE("resolve_overlaps rejects mixed sizes and accepts no masks") {
  RawMaskSet raw;
  CHECK(resolve_overlaps(raw).num_masks == 0);
  raw.masks = {rect(10, 10, 0, 0, 2, 2), rect(8, 10, 0, 0, 2, 2)};
  CHECK_THROWS_AS(resolve_overlaps(raw), InputError);
}

TEST_CASE("densify relabels and preserves the partition") {
  LabelImage img(2, 3);
  img << 0, 5, 9, 9, 5, 0;
  const auto m = densify(img);
  CHECK(m.num_masks == 2);
  LabelImage expect(2, 3);
  expect << 0, 1, 2, 2, 1, 0;
  CHECK((m.labels == expect).all());

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> d(0, 1000);
  LabelImage big(30, 30);
  for (int i = 0; i < big.size(); ++i) big.data()[i] = d(rng) % 7 == 0 ? 0 : d(rng) % 40 * 13;
  const auto dm = densify(big);
  for (int i = 0; i < big.size(); i += 7)
    for (int j = 0; j < big.size(); j += 3) {
      CHECK((big.data()[i] == big.data()[j]) == (dm.labels.data()[i] == dm.labels.data()[j]));
      CHECK((big.data()[i] == 0) == (dm.labels.data()[i] == 0));
    }
}

TEST_CASE("mask image load and save") {
  const auto path = (temp_dir() / "m.png").string();
  MaskImage zero;
  zero.labels = LabelImage::Zero(4, 6);
  save_mask_image(path, zero);
  CHECK(load_mask_image(path).num_masks == 0);

  LabelImage img(2, 3);
  img << 0, 5, 9, 9, 5, 0;
  write_png16(path, img.cast<std::uint16_t>());
  const auto m = load_mask_image(path);
  CHECK(m.num_masks == 2);
  CHECK(m.labels(0, 2) == 2);

  save_mask_image(path, m);
  const auto again = load_mask_image(path);
  CHECK((again.labels == m.labels).all());
  CHECK(again.num_masks == m.num_masks);

  Eigen::Array<std::uint8_t, -1, -1, Eigen::RowMajor> eight(3, 3);
  eight.setConstant(1);
  write_png8(path, eight);
  CHECK_THROWS_AS(load_mask_image(path), InputError);
  CHECK_THROWS_AS(load_mask_image((temp_dir() / "absent.png").string()), InputError);
}

TEST_CASE("binary mask directories") {
  const auto dir = temp_dir() / "frame0";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Image16 a = Image16::Zero(5, 5), b = Image16::Zero(5, 5);
  a.block(0, 0, 3, 3).setConstant(1);
  b.block(2, 2, 3, 3).setConstant(255);
  write_png16((dir / "mask_0.png").string(), a);
  write_png16((dir / "mask_1.png").string(), b);
  std::ofstream(dir / "scores.txt") << "0.4\n0.6\n";
  const auto m = resolve_overlaps(load_binary_masks(dir.string()));
  CHECK(m.num_masks == 2);
  CHECK(m.labels(2, 2) == 1);  // mask 1 wins the overlap
  CHECK(m.labels(0, 0) == 2);

  std::ofstream(dir / "scores.txt") << "0.4\n";
  CHECK_THROWS_AS(load_binary_masks(dir.string()), InputError);
  CHECK_THROWS_AS(load_binary_masks((temp_dir() / "nope").string()), InputError);
}
