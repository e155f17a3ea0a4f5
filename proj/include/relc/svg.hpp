// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Dependency-free SVG rendering of point clouds: three orthographic panels
// (xy, xz, yz) side by side, multiple layers per file, point radius scaled
// by depth so near points read larger.
#pragma once

#include <string>
#include <vector>

#include "relc/geometry.hpp"

namespace relc {

struct SvgLayer {
  const PointCloud* cloud = nullptr;
  std::string color = "#1f77b4";
  double opacity = 0.8;
};

/// Writes one SVG with the three projections of every layer, auto-fit to the
/// combined bounding box. Throws IoError on write failure.
void write_cloud_svg(const std::string& path, const std::vector<SvgLayer>& layers);

}  // namespace relc
