// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/shapes.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "relc/rng.hpp"

namespace relc {

namespace {

constexpr double kPi = std::numbers::pi;

// torus: R + r = 1, so the surface touches the unit sphere exactly
constexpr double kTorusMajor = 0.7;
constexpr double kTorusMinor = 0.3;
// box: half extents scaled so the corner diagonal is exactly 1
const Vec3 kBoxRaw{0.8, 0.6, 0.4};
// cylinder: radius and half height with sqrt(r^2 + h^2) = 1
constexpr double kCylRadius = 0.5;
const double kCylHalf = std::sqrt(1.0 - kCylRadius * kCylRadius);
// plane: square whose corners reach norm 1
const double kPlaneHalf = 1.0 / std::sqrt(2.0);

Vec3 unit_direction(Rng& g) {
  for (;;) {
    Vec3 v{gaussian(g), gaussian(g), gaussian(g)};
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

PointCloud gen_sphere(int n, Rng& g) {
  PointCloud c;
  for (int i = 0; i < n; ++i) c.add(unit_direction(g));
  return c;
}

PointCloud gen_torus(int n, Rng& g) {
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    const double theta = uniform(g, 0.0, 2.0 * kPi);
    double phi;
    // area element is proportional to R + r cos(phi); rejection-sample it
    for (;;) {
      phi = uniform(g, 0.0, 2.0 * kPi);
      const double accept = (kTorusMajor + kTorusMinor * std::cos(phi)) /
                            (kTorusMajor + kTorusMinor);
      if (uniform01(g) <= accept) break;
    }
    const double ring = kTorusMajor + kTorusMinor * std::cos(phi);
    c.add({ring * std::cos(theta), ring * std::sin(theta), kTorusMinor * std::sin(phi)});
  }
  return c;
}

PointCloud gen_box(int n, Rng& g) {
  const Vec3 e = box_half_extents();
  // face pairs: x = +-e.x (area e.y*e.z), y = +-e.y, z = +-e.z
  const double areas[3] = {e.y * e.z, e.x * e.z, e.x * e.y};
  const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    double pick = uniform(g, 0.0, total);
    int axis = 0;
    double sign = 1.0;
    for (int a = 0; a < 3; ++a) {
      if (pick < areas[a]) {
        axis = a;
        sign = 1.0;
        break;
      }
      pick -= areas[a];
      if (pick < areas[a]) {
        axis = a;
        sign = -1.0;
        break;
      }
      pick -= areas[a];
    }
    const double u = uniform(g, -1.0, 1.0), v = uniform(g, -1.0, 1.0);
    Vec3 p;
    if (axis == 0) p = {sign * e.x, u * e.y, v * e.z};
    else if (axis == 1) p = {u * e.x, sign * e.y, v * e.z};
    else p = {u * e.x, v * e.y, sign * e.z};
    c.add(p);
  }
  return c;
}

PointCloud gen_plane(int n, Rng& g) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.add({uniform(g, -kPlaneHalf, kPlaneHalf), uniform(g, -kPlaneHalf, kPlaneHalf), 0.0});
  return c;
}

PointCloud gen_cylinder(int n, Rng& g) {
  const double lateral = 2.0 * kPi * kCylRadius * 2.0 * kCylHalf;
  const double cap = kPi * kCylRadius * kCylRadius;
  const double total = lateral + 2.0 * cap;
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    const double pick = uniform(g, 0.0, total);
    const double theta = uniform(g, 0.0, 2.0 * kPi);
    if (pick < lateral) {
      const double z = uniform(g, -kCylHalf, kCylHalf);
      c.add({kCylRadius * std::cos(theta), kCylRadius * std::sin(theta), z});
    } else {
      const double sign = pick < lateral + cap ? 1.0 : -1.0;
      const double rad = kCylRadius * std::sqrt(uniform01(g));
      c.add({rad * std::cos(theta), rad * std::sin(theta), sign * kCylHalf});
    }
  }
  return c;
}

PointCloud gen_composite(int n, std::uint64_t seed) {
  Rng g(mix_seed(seed, 0xc0));
  const int parts = 2 + static_cast<int>(uniform_index(g, 3));  // 2..4 primitives
  static const ShapeFamily kPool[4] = {ShapeFamily::Sphere, ShapeFamily::Torus, ShapeFamily::Box,
                                       ShapeFamily::Cylinder};
  PointCloud c;
  for (int s = 0; s < parts; ++s) {
    const ShapeFamily fam = kPool[uniform_index(g, 4)];
    const double scale = uniform(g, 0.3, 0.6);
    const Vec3 shift{uniform(g, -0.4, 0.4), uniform(g, -0.4, 0.4), uniform(g, -0.4, 0.4)};
    const int quota = n / parts + (s == 0 ? n % parts : 0);
    PointCloud part = gen_shape(fam, std::max(quota, 8), mix_seed(seed, 0xc1, s));
    for (int i = 0; i < quota && i < part.count(); ++i) c.add(part[i] * scale + shift);
  }
  const double mx = c.max_norm();
  if (mx > 0.0)
    for (auto& p : c.points()) p = p / mx;
  return c;
}

}  // namespace

ShapeFamily parse_family(const std::string& name) {
  if (name == "sphere") return ShapeFamily::Sphere;
  if (name == "torus") return ShapeFamily::Torus;
  if (name == "box") return ShapeFamily::Box;
  if (name == "plane") return ShapeFamily::Plane;
  if (name == "cylinder") return ShapeFamily::Cylinder;
  if (name == "composite") return ShapeFamily::Composite;
  throw std::invalid_argument("unknown shape family: " + name);
}

std::string family_name(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::Sphere: return "sphere";
    case ShapeFamily::Torus: return "torus";
    case ShapeFamily::Box: return "box";
    case ShapeFamily::Plane: return "plane";
    case ShapeFamily::Cylinder: return "cylinder";
    case ShapeFamily::Composite: return "composite";
  }
  throw std::invalid_argument("unknown shape family enum");
}

Vec3 box_half_extents() {
  const double s = 1.0 / kBoxRaw.norm();
  return kBoxRaw * s;
}

PointCloud gen_shape(ShapeFamily family, int n, std::uint64_t seed) {
  if (n < 8) throw std::invalid_argument("gen_shape: need n >= 8");
  Rng g(mix_seed(seed, static_cast<std::uint64_t>(family) + 1));
  switch (family) {
    case ShapeFamily::Sphere: return gen_sphere(n, g);
    case ShapeFamily::Torus: return gen_torus(n, g);
    case ShapeFamily::Box: return gen_box(n, g);
    case ShapeFamily::Plane: return gen_plane(n, g);
    case ShapeFamily::Cylinder: return gen_cylinder(n, g);
    case ShapeFamily::Composite: return gen_composite(n, seed);
  }
  throw std::invalid_argument("unknown shape family enum");
}

std::pair<PointCloud, PointCloud> make_pair(const PairConfig& cfg, std::uint64_t seed) {
  if (cfg.n_partial < 1) throw std::invalid_argument("make_pair: n_partial >= 1");
  if (cfg.keep_fraction <= 0.0 || cfg.keep_fraction > 1.0)
    throw std::invalid_argument("make_pair: keep_fraction in (0,1]");
  PointCloud gt = gen_shape(cfg.family, cfg.n_gt, mix_seed(seed, 1));
  Rng g(mix_seed(seed, 2));
  const Vec3 dir = unit_direction(g);
  PointCloud cropped = crop_occlusion(gt, dir, cfg.keep_fraction, mix_seed(seed, 3));

  PointCloud partial;
  if (cropped.count() >= cfg.n_partial) {
    partial = cropped.select(farthest_point_sample(cropped, cfg.n_partial, mix_seed(seed, 4)));
  } else {
    partial = cropped;
    Rng pad(mix_seed(seed, 5));
    while (partial.count() < cfg.n_partial) {
      const Vec3& base = cropped[uniform_index(pad, cropped.count())];
      partial.add(base + Vec3{1e-3 * gaussian(pad), 1e-3 * gaussian(pad), 1e-3 * gaussian(pad)});
    }
  }
  return {std::move(partial), std::move(gt)};
}

}  // namespace relc
