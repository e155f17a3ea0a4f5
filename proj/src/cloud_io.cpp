// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "relc/error.hpp"

namespace relc {
namespace {

static_assert(sizeof(float) == 4, "PLY io assumes 4-byte IEEE floats");

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Scalar PLY property sizes; list properties are rejected for vertices.
int ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  return -1;
}

}  // namespace

PointCloud read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Vec3> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x >> p.y >> p.z))
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 'x y z'");
    std::string extra;
    if (ls >> extra)
      throw DataError(path + ":" + std::to_string(lineno) + ": trailing token '" + extra + "'");
    if (!p.finite())
      throw DataError(path + ":" + std::to_string(lineno) + ": non-finite coordinate");
    pts.push_back(p);
  }
  if (pts.empty()) throw DataError(path + ": no points");
  return PointCloud(std::move(pts));
}

void write_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  for (const Vec3& p : cloud.points()) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
  if (!out) throw IoError("write failed: " + path);
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || lower(line).rfind("ply", 0) != 0)
    throw DataError(path + ": missing ply magic");

  long vertex_count = -1;
  bool in_vertex = false, format_ok = false;
  int stride = 0, off_x = -1, off_y = -1, off_z = -1;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    tok = lower(tok);
    if (tok == "comment" || tok.empty()) continue;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (lower(fmt) != "binary_little_endian")
        throw DataError(path + ": unsupported PLY format '" + fmt + "'");
      format_ok = true;
    } else if (tok == "element") {
      std::string name;
      long n = 0;
      ls >> name >> n;
      in_vertex = lower(name) == "vertex";
      if (in_vertex) vertex_count = n;
      else if (vertex_count < 0)
        throw DataError(path + ": vertex element must come first");
    } else if (tok == "property") {
      if (!in_vertex) continue;
      std::string type, name;
      ls >> type >> name;
      type = lower(type);
      if (type == "list") throw DataError(path + ": list property in vertex element");
      int sz = ply_type_size(type);
      if (sz < 0) throw DataError(path + ": unknown property type '" + type + "'");
      name = lower(name);
      if (name == "x" || name == "y" || name == "z") {
        if (type != "float" && type != "float32")
          throw DataError(path + ": property '" + name + "' must be float");
        (name == "x" ? off_x : name == "y" ? off_y : off_z) = stride;
      }
      stride += sz;
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!format_ok) throw DataError(path + ": no format line");
  if (vertex_count < 0) throw DataError(path + ": no vertex element");
  if (off_x < 0 || off_y < 0 || off_z < 0) throw DataError(path + ": missing x/y/z properties");

  std::vector<char> row(static_cast<size_t>(stride));
  std::vector<Vec3> pts;
  pts.reserve(static_cast<size_t>(vertex_count));
  for (long i = 0; i < vertex_count; ++i) {
    in.read(row.data(), stride);
    if (!in) throw DataError(path + ": truncated vertex data");
    float fx, fy, fz;
    std::memcpy(&fx, row.data() + off_x, 4);
    std::memcpy(&fy, row.data() + off_y, 4);
    std::memcpy(&fz, row.data() + off_z, 4);
    Vec3 p{fx, fy, fz};
    if (!p.finite()) throw DataError(path + ": non-finite coordinate at vertex " + std::to_string(i));
    pts.push_back(p);
  }
  if (pts.empty()) throw DataError(path + ": no points");
  return PointCloud(std::move(pts));
}

void write_ply(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "element vertex " << cloud.count() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "end_header\n";
  for (const Vec3& p : cloud.points()) {
    float f[3] = {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)};
    out.write(reinterpret_cast<const char*>(f), sizeof(f));
  }
  if (!out) throw IoError("write failed: " + path);
}

PointCloud read_cloud(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot + 1));
  if (ext == "xyz" || ext == "txt") return read_xyz(path);
  if (ext == "ply") return read_ply(path);
  throw IoError("unsupported point cloud extension: " + path);
}

}  // namespace relc
