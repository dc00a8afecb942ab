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

#include "spgrow/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace spgrow {

namespace {

enum class PlyFormat { kAscii, kLittle, kBig };

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

std::size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw InputError("unsupported PLY property type '" + t + "'");
}

template <typename T>
T load_raw(const char* p, bool swap) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if (swap) {
    char* b = reinterpret_cast<char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

double decode(const std::string& t, const char* p, bool swap) {
  if (t == "char" || t == "int8") return load_raw<std::int8_t>(p, swap);
  if (t == "uchar" || t == "uint8") return load_raw<std::uint8_t>(p, swap);
  if (t == "short" || t == "int16") return load_raw<std::int16_t>(p, swap);
  if (t == "ushort" || t == "uint16") return load_raw<std::uint16_t>(p, swap);
  if (t == "int" || t == "int32") return load_raw<std::int32_t>(p, swap);
  if (t == "uint" || t == "uint32") return load_raw<std::uint32_t>(p, swap);
  if (t == "float" || t == "float32") return load_raw<float>(p, swap);
  return load_raw<double>(p, swap);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw InputError("cannot open '" + path + "'");
  return f;
}

}  // namespace

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  require(line.rfind("ply", 0) == 0, path + ": not a PLY file");

  PlyFormat format = PlyFormat::kAscii;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") format = PlyFormat::kAscii;
      else if (f == "binary_little_endian") format = PlyFormat::kLittle;
      else if (f == "binary_big_endian") format = PlyFormat::kBig;
      else throw InputError(path + ": unknown PLY format '" + f + "'");
    } else if (key == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (key == "property") {
      require(!elements.empty(), path + ": property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
        type_size(p.count_type);
      } else {
        p.type = t;
        ls >> p.name;
      }
      type_size(p.type);
      elements.back().props.push_back(p);
    } else if (key == "end_header") {
      break;
    }
  }
  require(static_cast<bool>(in), path + ": truncated PLY header");

  const bool swap = (format == PlyFormat::kBig) == (std::endian::native == std::endian::little);
  PointCloud cloud;
  bool found = false;
  for (const auto& e : elements) {
    const bool is_vertex = e.name == "vertex";
    int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1, ir = -1, ig = -1, ib = -1;
    for (int k = 0; k < static_cast<int>(e.props.size()); ++k) {
      const auto& n = e.props[k].name;
      if (n == "x") ix = k;
      if (n == "y") iy = k;
      if (n == "z") iz = k;
      if (n == "nx") inx = k;
      if (n == "ny") iny = k;
      if (n == "nz") inz = k;
      if (n == "red") ir = k;
      if (n == "green") ig = k;
      if (n == "blue") ib = k;
    }
    if (is_vertex) {
      require(ix >= 0 && iy >= 0 && iz >= 0, path + ": vertex element lacks x/y/z");
      found = true;
      cloud.positions.resize(3, static_cast<Eigen::Index>(e.count));
      if (inx >= 0 && iny >= 0 && inz >= 0) cloud.normals.resize(3, static_cast<Eigen::Index>(e.count));
      if (ir >= 0 && ig >= 0 && ib >= 0) cloud.colors.resize(3, static_cast<Eigen::Index>(e.count));
    }
    std::vector<double> values(e.props.size());
    for (std::size_t row = 0; row < e.count; ++row) {
      if (format == PlyFormat::kAscii) {
        require(static_cast<bool>(std::getline(in, line)), path + ": truncated PLY body");
        std::istringstream ls(line);
        for (std::size_t k = 0; k < e.props.size(); ++k) {
          if (e.props[k].is_list) {
            std::size_t n = 0;
            ls >> n;
            double skip;
            for (std::size_t q = 0; q < n; ++q) ls >> skip;
            values[k] = 0;
          } else {
            ls >> values[k];
          }
        }
        require(!ls.fail(), path + ": malformed PLY row " + std::to_string(row));
      } else {
        char buf[8];
        for (std::size_t k = 0; k < e.props.size(); ++k) {
          const auto& p = e.props[k];
          if (p.is_list) {
            const std::size_t cs = type_size(p.count_type);
            require(static_cast<bool>(in.read(buf, static_cast<std::streamsize>(cs))),
                    path + ": truncated PLY body");
            const auto n = static_cast<std::size_t>(decode(p.count_type, buf, swap));
            in.seekg(static_cast<std::streamoff>(n * type_size(p.type)), std::ios::cur);
            values[k] = 0;
          } else {
            const std::size_t ts = type_size(p.type);
            require(static_cast<bool>(in.read(buf, static_cast<std::streamsize>(ts))),
                    path + ": truncated PLY body");
            values[k] = decode(p.type, buf, swap);
          }
        }
      }
      if (!is_vertex) continue;
      const auto c = static_cast<Eigen::Index>(row);
      cloud.positions.col(c) << values[ix], values[iy], values[iz];
      if (cloud.normals.cols() != 0) {
        Eigen::Vector3d n(values[inx], values[iny], values[inz]);
        const double len = n.norm();
        require(len > 0.5, path + ": zero-length normal at vertex " + std::to_string(row));
        // Float-rounded unit normals are kept as stored.
        cloud.normals.col(c) = std::abs(len - 1.0) <= 1e-6 ? n : Eigen::Vector3d(n / len);
      }
      if (cloud.colors.cols() != 0) {
        cloud.colors.col(c) << static_cast<std::uint8_t>(values[ir]),
            static_cast<std::uint8_t>(values[ig]), static_cast<std::uint8_t>(values[ib]);
      }
    }
    if (is_vertex) break;
  }
  require(found, path + ": no vertex element");
  cloud.validate();
  return cloud;
}

void write_ply(const std::string& path, const PointCloud& cloud, bool ascii) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write '" + path + "'");
  const bool normals = cloud.has_normals();
  const bool colors = cloud.has_colors();
  out << "ply\nformat " << (ascii ? "ascii" : "binary_little_endian") << " 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
  if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  auto put_float = [&](double v) {
    float f = static_cast<float>(v);
    if constexpr (std::endian::native == std::endian::big) {
      char* b = reinterpret_cast<char*>(&f);
      std::reverse(b, b + 4);
    }
    out.write(reinterpret_cast<const char*>(&f), 4);
  };
  out << std::setprecision(9);
  for (Index i = 0; i < cloud.size(); ++i) {
    if (ascii) {
      out << static_cast<float>(cloud.positions(0, i)) << ' '
          << static_cast<float>(cloud.positions(1, i)) << ' '
          << static_cast<float>(cloud.positions(2, i));
      if (normals) {
        for (int d = 0; d < 3; ++d) out << ' ' << static_cast<float>(cloud.normals(d, i));
      }
      if (colors) {
        for (int d = 0; d < 3; ++d) out << ' ' << static_cast<int>(cloud.colors(d, i));
      }
      out << '\n';
    } else {
      for (int d = 0; d < 3; ++d) put_float(cloud.positions(d, i));
      if (normals) {
        for (int d = 0; d < 3; ++d) put_float(cloud.normals(d, i));
      }
      if (colors) {
        for (int d = 0; d < 3; ++d) out.put(static_cast<char>(cloud.colors(d, i)));
      }
    }
  }
  require(static_cast<bool>(out), "failed writing '" + path + "'");
}

Image16 read_png_gray(const std::string& path, bool require_16bit) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  require(std::fread(sig, 1, 8, f.get()) == 8 && png_sig_cmp(sig, 0, 8) == 0,
          path + ": not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  require(png && info, path + ": libpng initialization failed");
  Image16 image;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError(path + ": corrupt PNG");
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (require_16bit && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError(path + ": expected a " + std::string(require_16bit ? "16-bit " : "") +
                     "single-channel PNG");
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);
  const auto rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> row(rowbytes);
  image.resize(height, width);
  for (png_uint_32 r = 0; r < height; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 c = 0; c < width; ++c) {
      if (depth == 16) {
        std::uint16_t v;
        std::memcpy(&v, row.data() + 2 * c, 2);
        image(r, c) = v;
      } else {
        image(r, c) = row[c];
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void write_png16(const std::string& path, const Image16& image) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  require(png && info, path + ": libpng initialization failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError(path + ": PNG write failed");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols()),
               static_cast<png_uint_32>(image.rows()), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(image.cols()) * 2);
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const std::uint16_t v = image(r, c);
      row[2 * c] = static_cast<unsigned char>(v >> 8);
      row[2 * c + 1] = static_cast<unsigned char>(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

DepthImage read_depth_png(const std::string& path) {
  return read_png_gray(path, true).cast<float>() / 1000.0f;
}

void write_depth_png(const std::string& path, const DepthImage& depth) {
  require((depth >= 0).all() && (depth < 65.5f).all(), path + ": depth out of 16-bit mm range");
  write_png16(path, (depth * 1000.0f).round().cast<std::uint16_t>());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Intrinsics read_intrinsics(const std::string& path) {
  std::istringstream in(read_text_file(path));
  Intrinsics k;
  in >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height;
  require(!in.fail(), path + ": expected 'fx fy cx cy width height'");
  require(k.fx > 0 && k.fy > 0 && k.width > 0 && k.height > 0,
          path + ": non-positive intrinsics");
  return k;
}

void write_intrinsics(const std::string& path, const Intrinsics& k) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write '" + path + "'");
  out << std::setprecision(17) << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << ' '
      << k.width << ' ' << k.height << '\n';
}

Eigen::Matrix4d read_matrix4(const std::string& path) {
  std::istringstream in(read_text_file(path));
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) in >> m(r, c);
  require(!in.fail(), path + ": expected 16 numbers (row-major 4x4)");
  return m;
}

void write_matrix4(const std::string& path, const Eigen::Matrix4d& m) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write '" + path + "'");
  out << std::setprecision(17);
  for (int r = 0; r < 4; ++r) {
    out << m(r, 0) << ' ' << m(r, 1) << ' ' << m(r, 2) << ' ' << m(r, 3) << '\n';
  }
}

std::vector<std::int64_t> read_id_list(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::int64_t> ids;
  std::int64_t v;
  while (in >> v) ids.push_back(v);
  require(in.eof(), path + ": expected one integer per line");
  return ids;
}

void write_id_list(const std::string& path, const std::vector<std::int64_t>& ids) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write '" + path + "'");
  for (auto v : ids) out << v << '\n';
}

}  // namespace spgrow
