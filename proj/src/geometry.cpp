// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "relc/error.hpp"
#include "relc/rng.hpp"

namespace relc {

bool PointCloud::finite() const {
  for (const Vec3& p : points_) {
    if (!p.finite()) return false;
  }
  return true;
}

double PointCloud::max_norm() const {
  double m = 0.0;
  for (const Vec3& p : points_) m = std::max(m, p.norm());
  return m;
}

Vec3 PointCloud::centroid() const {
  Vec3 c;
  for (const Vec3& p : points_) c = c + p;
  return empty() ? c : c / static_cast<double>(count());
}

PointCloud PointCloud::select(const std::vector<int>& ids) const {
  std::vector<Vec3> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(points_[static_cast<size_t>(i)]);
  return PointCloud(std::move(out));
}

NeighborIndex knn(const PointCloud& query, const PointCloud& reference, int k) {
  if (query.empty() || reference.empty()) throw std::invalid_argument("knn: empty cloud");
  if (k < 1 || k > reference.count())
    throw std::invalid_argument("knn: k out of range (k=" + std::to_string(k) +
                                ", reference=" + std::to_string(reference.count()) + ")");
  if (!query.finite() || !reference.finite()) throw DataError("knn: non-finite coordinate");

  const int nq = query.count();
  const int nr = reference.count();
  NeighborIndex out;
  out.n_query = nq;
  out.k = k;
  out.ids.resize(static_cast<size_t>(nq) * k);
  out.dist.resize(static_cast<size_t>(nq) * k);

  std::vector<std::pair<double, int>> cand(static_cast<size_t>(nr));
  for (int q = 0; q < nq; ++q) {
    for (int r = 0; r < nr; ++r)
      cand[static_cast<size_t>(r)] = {distance2(query[q], reference[r]), r};
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int j = 0; j < k; ++j) {
      out.ids[static_cast<size_t>(q) * k + j] = cand[static_cast<size_t>(j)].second;
      out.dist[static_cast<size_t>(q) * k + j] = std::sqrt(cand[static_cast<size_t>(j)].first);
    }
  }
  return out;
}

std::vector<int> farthest_point_sample_from(const PointCloud& cloud, int m, int start) {
  const int n = cloud.count();
  if (m < 1 || m > n) throw std::invalid_argument("fps: m out of range");
  if (start < 0 || start >= n) throw std::invalid_argument("fps: start out of range");

  std::vector<int> picked;
  picked.reserve(static_cast<size_t>(m));
  std::vector<char> taken(static_cast<size_t>(n), 0);
  std::vector<double> min_d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());

  int cur = start;
  picked.push_back(cur);
  taken[static_cast<size_t>(cur)] = 1;
  for (int it = 1; it < m; ++it) {
    int best = -1;
    double best_d2 = -1.0;
    for (int i = 0; i < n; ++i) {
      if (taken[static_cast<size_t>(i)]) continue;
      double d2 = distance2(cloud[i], cloud[cur]);
      if (d2 < min_d2[static_cast<size_t>(i)]) min_d2[static_cast<size_t>(i)] = d2;
      if (min_d2[static_cast<size_t>(i)] > best_d2) {  // strict > keeps the smallest index on ties
        best_d2 = min_d2[static_cast<size_t>(i)];
        best = i;
      }
    }
    cur = best;
    picked.push_back(cur);
    taken[static_cast<size_t>(cur)] = 1;
  }
  return picked;
}

std::vector<int> farthest_point_sample(const PointCloud& cloud, int m, std::uint64_t seed) {
  if (cloud.empty()) throw std::invalid_argument("fps: empty cloud");
  Rng rng(mix_seed(seed));
  return farthest_point_sample_from(cloud, m, uniform_index(rng, cloud.count()));
}

NormalizeResult normalize_unit_sphere(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("normalize_unit_sphere: empty cloud");
  if (!cloud.finite()) throw DataError("normalize_unit_sphere: non-finite coordinate");

  NormalizeResult res;
  res.centroid = cloud.centroid();
  std::vector<Vec3> centered;
  centered.reserve(static_cast<size_t>(cloud.count()));
  double scale = 0.0;
  for (const Vec3& p : cloud.points()) {
    Vec3 q = p - res.centroid;
    scale = std::max(scale, q.norm());
    centered.push_back(q);
  }
  res.scale = scale > 0.0 ? scale : 1.0;
  for (Vec3& q : centered) q = q / res.scale;
  res.cloud = PointCloud(std::move(centered));
  return res;
}

PointCloud denormalize(const PointCloud& cloud, const Vec3& centroid, double scale) {
  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(cloud.count()));
  for (const Vec3& p : cloud.points()) out.push_back(p * scale + centroid);
  return PointCloud(std::move(out));
}

PointCloud crop_occlusion(const PointCloud& cloud, const Vec3& view_dir, double keep_fraction,
                          std::uint64_t /*seed*/) {
  if (cloud.empty()) throw std::invalid_argument("crop_occlusion: empty cloud");
  if (keep_fraction <= 0.0 || keep_fraction > 1.0)
    throw std::invalid_argument("crop_occlusion: keep_fraction outside (0,1]");
  const double vn = view_dir.norm();
  if (vn == 0.0) throw std::invalid_argument("crop_occlusion: zero-norm view_dir");
  const Vec3 dir = view_dir / vn;

  const int n = cloud.count();
  const int keep = static_cast<int>(std::ceil(keep_fraction * n));
  std::vector<std::pair<double, int>> proj(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) proj[static_cast<size_t>(i)] = {cloud[i].dot(dir), i};
  std::sort(proj.begin(), proj.end());
  std::vector<int> ids(static_cast<size_t>(keep));
  for (int i = 0; i < keep; ++i) ids[static_cast<size_t>(i)] = proj[static_cast<size_t>(i)].second;
  std::sort(ids.begin(), ids.end());  // keep original point order
  return cloud.select(ids);
}

}  // namespace relc
