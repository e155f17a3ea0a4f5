// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic benchmark shapes. Every family samples its surface
// area-weighted and is normalized into the unit sphere analytically (no
// data-dependent recentering), so surface identities stay exact: sphere
// points have norm 1, box points sit on faces at the known half extents.
// The composite family is the exception: it is a seeded union of scaled,
// shifted primitives and is normalized by the largest sampled norm.
#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "relc/geometry.hpp"

namespace relc {

enum class ShapeFamily { Sphere, Torus, Box, Plane, Cylinder, Composite };

ShapeFamily parse_family(const std::string& name);  // invalid-argument on unknown
std::string family_name(ShapeFamily family);

/// Half extents of the normalized box family (faces at +-x, +-y, +-z).
Vec3 box_half_extents();

/// n >= 8 area-weighted surface samples, deterministic in (family, n, seed).
PointCloud gen_shape(ShapeFamily family, int n, std::uint64_t seed);

struct PairConfig {
  ShapeFamily family = ShapeFamily::Torus;
  int n_gt = 2048;
  int n_partial = 512;
  double keep_fraction = 0.5;
};

/// Ground truth plus its occluded partial view. The partial cloud is cropped
/// along a seeded random view direction, spread to n_partial points by FPS,
/// and padded by jittered duplication (jitter 1e-3) when the crop is short.
std::pair<PointCloud, PointCloud> make_pair(const PairConfig& cfg, std::uint64_t seed);

}  // namespace relc
