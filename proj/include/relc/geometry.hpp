// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic geometric kernels: point cloud container, k-NN search,
// farthest point sampling, unit-sphere normalization and occlusion cropping.
// Everything here is a pure function of its inputs and carries no autodiff.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace relc {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance2(const Vec3& a, const Vec3& b) { return (a - b).norm2(); }
inline double distance(const Vec3& a, const Vec3& b) { return std::sqrt(distance2(a, b)); }

/// Ordered list of 3D points in unitless model space.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> pts) : points_(std::move(pts)) {}

  int count() const { return static_cast<int>(points_.size()); }
  bool empty() const { return points_.empty(); }
  const Vec3& operator[](int i) const { return points_[static_cast<size_t>(i)]; }
  Vec3& operator[](int i) { return points_[static_cast<size_t>(i)]; }
  const std::vector<Vec3>& points() const { return points_; }
  std::vector<Vec3>& points() { return points_; }

  void add(const Vec3& p) { points_.push_back(p); }
  bool finite() const;
  double max_norm() const;
  Vec3 centroid() const;

  /// Rows picked by index, in the given order.
  PointCloud select(const std::vector<int>& ids) const;

 private:
  std::vector<Vec3> points_;
};

/// k nearest neighbors per query row: ids and Euclidean distances,
/// ascending per row, ties broken by smaller reference index.
struct NeighborIndex {
  int n_query = 0;
  int k = 0;
  std::vector<int> ids;       // n_query * k, row major
  std::vector<double> dist;   // same layout

  int id(int q, int j) const { return ids[static_cast<size_t>(q) * k + j]; }
  double distance(int q, int j) const { return dist[static_cast<size_t>(q) * k + j]; }
};

/// Brute-force exact k-NN of every query point in the reference cloud.
/// Throws std::invalid_argument if k > reference.count() or either cloud is
/// empty; DataError on non-finite coordinates.
NeighborIndex knn(const PointCloud& query, const PointCloud& reference, int k);

/// Greedy max-min farthest point sampling; the start index is drawn
/// seeded-uniform over [0, count). Deterministic given (cloud, m, seed).
std::vector<int> farthest_point_sample(const PointCloud& cloud, int m, std::uint64_t seed);

/// FPS with an explicitly forced start index.
std::vector<int> farthest_point_sample_from(const PointCloud& cloud, int m, int start);

struct NormalizeResult {
  PointCloud cloud;
  Vec3 centroid;
  double scale = 1.0;  // max point norm after centering; 1 if degenerate
};

/// Centers the cloud on its centroid and scales so the max norm is 1.
NormalizeResult normalize_unit_sphere(const PointCloud& cloud);

/// Exact inverse of normalize_unit_sphere given its returned parameters.
PointCloud denormalize(const PointCloud& cloud, const Vec3& centroid, double scale);

/// Keeps the ceil(keep_fraction * count) points with the smallest projection
/// onto view_dir (far-side occlusion). The seed parameter is reserved for
/// randomized tie handling and is unused by the half-space model.
PointCloud crop_occlusion(const PointCloud& cloud, const Vec3& view_dir, double keep_fraction,
                          std::uint64_t seed);

}  // namespace relc
