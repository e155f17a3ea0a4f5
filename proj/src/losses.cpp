// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/losses.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "relc/rng.hpp"

namespace relc {

namespace {

void check_nonempty(const PointCloud& a, const PointCloud& b, const char* what) {
  if (a.empty() || b.empty()) throw std::invalid_argument(std::string(what) + ": empty cloud");
}

/// Index of the nearest point of `cloud` to `p`; ties go to the smaller index.
int nearest_id(const Vec3& p, const PointCloud& cloud) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cloud.count(); ++i) {
    const double d = distance2(p, cloud[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double nearest_dist2(const Vec3& p, const PointCloud& cloud) {
  return distance2(p, cloud[nearest_id(p, cloud)]);
}

PointCloud cloud_of(Tensor t) {
  const Shape& s = t.shape();
  if (s.rank() != 2 || s.dim(1) != 3)
    throw std::invalid_argument("chamfer: predicted tensor must be (n,3), got " + s.str());
  PointCloud c;
  auto v = t.values();
  for (int i = 0; i < s.dim(0); ++i)
    c.add({v[static_cast<size_t>(i) * 3], v[static_cast<size_t>(i) * 3 + 1],
           v[static_cast<size_t>(i) * 3 + 2]});
  return c;
}

}  // namespace

double chamfer_l1(const PointCloud& a, const PointCloud& b) {
  check_nonempty(a, b, "chamfer_l1");
  double sum_ab = 0.0, sum_ba = 0.0;
  for (const auto& p : a.points()) sum_ab += std::sqrt(nearest_dist2(p, b));
  for (const auto& p : b.points()) sum_ba += std::sqrt(nearest_dist2(p, a));
  return sum_ab / a.count() + sum_ba / b.count();
}

double chamfer_l2(const PointCloud& a, const PointCloud& b) {
  check_nonempty(a, b, "chamfer_l2");
  double sum_ab = 0.0, sum_ba = 0.0;
  for (const auto& p : a.points()) sum_ab += nearest_dist2(p, b);
  for (const auto& p : b.points()) sum_ba += nearest_dist2(p, a);
  return sum_ab / a.count() + sum_ba / b.count();
}

double bounding_sphere_diameter(const PointCloud& c) {
  if (c.empty()) throw std::invalid_argument("bounding_sphere_diameter: empty cloud");
  const Vec3 mid = c.centroid();
  double max_d2 = 0.0;
  for (const auto& p : c.points()) max_d2 = std::max(max_d2, distance2(p, mid));
  return 2.0 * std::sqrt(max_d2);
}

double f_score(const PointCloud& pred, const PointCloud& gt, double threshold_fraction) {
  check_nonempty(pred, gt, "f_score");
  if (threshold_fraction <= 0.0) throw std::invalid_argument("f_score: threshold must be > 0");
  const double tau = threshold_fraction * bounding_sphere_diameter(gt);
  const double tau2 = tau * tau;
  int hit_p = 0, hit_g = 0;
  for (const auto& p : pred.points())
    if (nearest_dist2(p, gt) <= tau2) ++hit_p;
  for (const auto& p : gt.points())
    if (nearest_dist2(p, pred) <= tau2) ++hit_g;
  const double precision = static_cast<double>(hit_p) / pred.count();
  const double recall = static_cast<double>(hit_g) / gt.count();
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double fidelity(const PointCloud& input, const PointCloud& pred) {
  check_nonempty(input, pred, "fidelity");
  double sum = 0.0;
  for (const auto& p : input.points()) sum += std::sqrt(nearest_dist2(p, pred));
  return sum / input.count();
}

double mmd(const PointCloud& pred, const std::vector<PointCloud>& refs) {
  if (pred.empty() || refs.empty()) throw std::invalid_argument("mmd: empty input");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ref : refs) best = std::min(best, chamfer_l2(pred, ref));
  return best;
}

Tensor chamfer_l1_diff(Tape& tape, Tensor pred, const PointCloud& target) {
  const PointCloud pred_host = cloud_of(pred);
  check_nonempty(pred_host, target, "chamfer_l1_diff");
  const int n = pred_host.count(), m = target.count();

  // pred -> target: per predicted point, its fixed nearest target point
  std::vector<double> tgt_rows(static_cast<size_t>(n) * 3);
  for (int i = 0; i < n; ++i) {
    const Vec3& t = target[nearest_id(pred_host[i], target)];
    tgt_rows[static_cast<size_t>(i) * 3] = t.x;
    tgt_rows[static_cast<size_t>(i) * 3 + 1] = t.y;
    tgt_rows[static_cast<size_t>(i) * 3 + 2] = t.z;
  }
  Tensor d1 = tape.sub(pred, tape.constant(Shape{n, 3}, std::move(tgt_rows)));
  Tensor n1 = tape.sqrt(tape.sum_over_axis(tape.mul(d1, d1), 1));  // (n,1)
  Tensor m1 = tape.mean_over_axis(n1, 0);                          // (1,1)

  // target -> pred: per target point, the matching predicted row
  std::vector<int> ids(static_cast<size_t>(m));
  std::vector<double> tgt_flat(static_cast<size_t>(m) * 3);
  for (int j = 0; j < m; ++j) {
    ids[static_cast<size_t>(j)] = nearest_id(target[j], pred_host);
    tgt_flat[static_cast<size_t>(j) * 3] = target[j].x;
    tgt_flat[static_cast<size_t>(j) * 3 + 1] = target[j].y;
    tgt_flat[static_cast<size_t>(j) * 3 + 2] = target[j].z;
  }
  Tensor d2 = tape.sub(tape.gather_rows(pred, ids), tape.constant(Shape{m, 3}, std::move(tgt_flat)));
  Tensor n2 = tape.sqrt(tape.sum_over_axis(tape.mul(d2, d2), 1));  // (m,1)
  Tensor m2 = tape.mean_over_axis(n2, 0);                          // (1,1)

  return tape.add(m1, m2);
}

DenoiseBatch build_denoise_batch(const PointCloud& gt, int n_queries, double sigma,
                                 int patch_size, std::uint64_t seed) {
  if (gt.empty()) throw std::invalid_argument("build_denoise_batch: empty ground truth");
  if (n_queries < 0 || patch_size < 1 || patch_size > gt.count())
    throw std::invalid_argument("build_denoise_batch: bad query/patch sizes");
  DenoiseBatch batch;
  Rng g(mix_seed(seed, 0x9d5f));
  for (int i = 0; i < n_queries; ++i) {
    const Vec3& c = gt[uniform_index(g, gt.count())];
    const Vec3 noise{sigma * gaussian(g), sigma * gaussian(g), sigma * gaussian(g)};
    batch.clean.add(c);
    batch.noisy.add(c + noise);
  }
  if (n_queries > 0) {
    NeighborIndex idx = knn(batch.clean, gt, patch_size);
    for (int i = 0; i < n_queries; ++i) {
      PointCloud patch;
      for (int j = 0; j < patch_size; ++j) patch.add(gt[idx.id(i, j)]);
      batch.patches.push_back(std::move(patch));
    }
  }
  return batch;
}

LossBreakdown loss_total(Tape& tape, Tensor proxy_coords, Tensor dense_points,
                         const PointCloud& gt, Tensor denoise_points,
                         const std::vector<PointCloud>& patches, double lambda) {
  LossBreakdown out;
  out.lambda = lambda;
  Tensor j0 = chamfer_l1_diff(tape, proxy_coords, gt);
  Tensor j1 = chamfer_l1_diff(tape, dense_points, gt);
  out.j0 = j0.item();
  out.j1 = j1.item();

  Tensor sum01 = tape.add(j0, j1);
  if (patches.empty() || !denoise_points.valid()) {
    out.denoise_empty = true;
    out.j_denoise = 0.0;
    out.node = sum01;
    out.total = out.node.item();
    return out;
  }

  const int nq = static_cast<int>(patches.size());
  const int rows = denoise_points.shape().dim(0);
  if (rows % nq != 0)
    throw std::invalid_argument("loss_total: denoise rows not divisible by query count");
  const int u = rows / nq;
  Tensor jd;
  for (int i = 0; i < nq; ++i) {
    std::vector<int> slice(static_cast<size_t>(u));
    std::iota(slice.begin(), slice.end(), i * u);
    Tensor patch_pred = tape.gather_rows(denoise_points, slice);
    Tensor cd = chamfer_l1_diff(tape, patch_pred, patches[static_cast<size_t>(i)]);
    jd = i == 0 ? cd : tape.add(jd, cd);
  }
  jd = tape.scale(jd, 1.0 / nq);
  out.j_denoise = jd.item();
  out.node = tape.add(sum01, tape.scale(jd, lambda));
  out.total = out.node.item();
  return out;
}

}  // namespace relc
