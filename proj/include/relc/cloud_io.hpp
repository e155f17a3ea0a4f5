// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Point cloud file formats: ASCII XYZ (one "x y z" per line) and
// binary-little-endian PLY with float x/y/z vertex properties.
#pragma once

#include <string>

#include "relc/geometry.hpp"

namespace relc {

PointCloud read_xyz(const std::string& path);
void write_xyz(const PointCloud& cloud, const std::string& path);

PointCloud read_ply(const std::string& path);
void write_ply(const PointCloud& cloud, const std::string& path);

/// Dispatches on file extension (.xyz / .ply, case-insensitive).
PointCloud read_cloud(const std::string& path);

}  // namespace relc
