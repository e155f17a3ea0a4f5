// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Metrics against hand values and brute-force oracles, the differentiable
// Chamfer path, the denoising batch builder, and the combined objective.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "relc/losses.hpp"
#include "relc/rng.hpp"

using relc::PointCloud;
using relc::Rng;
using relc::Shape;
using relc::Tape;
using relc::Tensor;

namespace {

PointCloud random_cloud(int n, Rng& rng, double extent = 1.0) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.add({relc::uniform(rng, -extent, extent), relc::uniform(rng, -extent, extent),
           relc::uniform(rng, -extent, extent)});
  return c;
}

Tensor cloud_tensor(Tape& t, const PointCloud& c, bool requires_grad) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(c.count()) * 3);
  for (int i = 0; i < c.count(); ++i) {
    v.push_back(c[i].x);
    v.push_back(c[i].y);
    v.push_back(c[i].z);
  }
  return requires_grad ? t.leaf(Shape{c.count(), 3}, v, true)
                       : t.constant(Shape{c.count(), 3}, v);
}

}  // namespace

TEST_CASE("chamfer hand values") {
  PointCloud a, b;
  a.add({0, 0, 0});
  b.add({1, 0, 0});
  CHECK(relc::chamfer_l1(a, b) == doctest::Approx(2.0).epsilon(1e-15));

  PointCloud c;
  c.add({2, 0, 0});
  CHECK(relc::chamfer_l2(a, c) == doctest::Approx(8.0).epsilon(1e-15));

  CHECK(relc::chamfer_l1(a, a) == 0.0);
  CHECK(relc::chamfer_l2(a, a) == 0.0);
}

TEST_CASE("chamfer matches the double-loop oracle on 100 random pairs") {
  Rng rng(71);
  for (int t = 0; t < 100; ++t) {
    PointCloud a = random_cloud(3 + relc::uniform_index(rng, 40), rng);
    PointCloud b = random_cloud(3 + relc::uniform_index(rng, 40), rng);
    CHECK(relc::chamfer_l1(a, b) == doctest::Approx(oracle::chamfer_l1(a, b)).epsilon(1e-12));
    CHECK(relc::chamfer_l2(a, b) == doctest::Approx(oracle::chamfer_l2(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("chamfer is symmetric under argument swap") {
  Rng rng(72);
  PointCloud a = random_cloud(20, rng), b = random_cloud(30, rng);
  CHECK(relc::chamfer_l1(a, b) == doctest::Approx(relc::chamfer_l1(b, a)).epsilon(1e-14));
  CHECK(relc::chamfer_l2(a, b) == doctest::Approx(relc::chamfer_l2(b, a)).epsilon(1e-14));
}

TEST_CASE("f_score threshold scales with the gt bounding sphere") {
  // gt diameter = 2: centroid at origin, extremes at distance 1.
  PointCloud gt;
  gt.add({1, 0, 0});
  gt.add({-1, 0, 0});
  CHECK(relc::bounding_sphere_diameter(gt) == doctest::Approx(2.0).epsilon(1e-15));

  // Prediction within 1% of the diameter (0.02) of each gt point: perfect.
  PointCloud close;
  close.add({1.015, 0, 0});
  close.add({-1.015, 0, 0});
  CHECK(relc::f_score(close, gt, 0.01) == doctest::Approx(1.0).epsilon(1e-12));

  // Far prediction: zero.
  PointCloud far;
  far.add({5, 5, 5});
  far.add({-5, -5, -5});
  CHECK(relc::f_score(far, gt, 0.01) == 0.0);

  // Against the oracle at the resolved absolute threshold.
  Rng rng(73);
  for (int t = 0; t < 20; ++t) {
    PointCloud p = random_cloud(25, rng), g = random_cloud(25, rng);
    const double tau = 0.01 * relc::bounding_sphere_diameter(g);
    CHECK(relc::f_score(p, g, 0.01) ==
          doctest::Approx(oracle::f_score_abs(p, g, tau)).epsilon(1e-12));
  }
}

TEST_CASE("fidelity hand value and perfect-coverage zero") {
  PointCloud in, pred;
  in.add({0, 0, 0});
  pred.add({1, 0, 0});
  CHECK(relc::fidelity(in, pred) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(relc::fidelity(in, in) == 0.0);
}

TEST_CASE("mmd is the minimum chamfer over the reference set") {
  Rng rng(74);
  PointCloud pred = random_cloud(12, rng);
  std::vector<PointCloud> refs;
  for (int i = 0; i < 4; ++i) refs.push_back(random_cloud(15, rng));
  double want = 1e300;
  for (const auto& r : refs) want = std::min(want, oracle::chamfer_l2(pred, r));
  CHECK(relc::mmd(pred, refs) == doctest::Approx(want).epsilon(1e-12));
  // A reference equal to the prediction drives mmd to zero.
  refs.push_back(pred);
  CHECK(relc::mmd(pred, refs) == doctest::Approx(0.0));
}

TEST_CASE("differentiable chamfer value matches the host metric") {
  Rng rng(75);
  for (int trial = 0; trial < 10; ++trial) {
    PointCloud a = random_cloud(15, rng), b = random_cloud(22, rng);
    Tape t;
    Tensor pred = cloud_tensor(t, a, true);
    Tensor node = relc::chamfer_l1_diff(t, pred, b);
    CHECK(node.item() == doctest::Approx(relc::chamfer_l1(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("differentiable chamfer gradients pass the probe") {
  Rng rng(76);
  PointCloud a = random_cloud(8, rng), b = random_cloud(11, rng);
  std::vector<double> at;
  for (int i = 0; i < a.count(); ++i) {
    at.push_back(a[i].x);
    at.push_back(a[i].y);
    at.push_back(a[i].z);
  }
  Tape t;
  Tensor pred = t.leaf(Shape{a.count(), 3}, at, true);
  t.backward(relc::chamfer_l1_diff(t, pred, b));
  std::vector<double> analytic(pred.grad().begin(), pred.grad().end());

  // The discrete matching can flip under perturbation; keep eps small and
  // accept the FD tolerance of the op-level contract.
  auto eval = [&](const std::vector<double>& vals) {
    Tape tp;
    Tensor p = tp.leaf(Shape{a.count(), 3}, vals, true);
    return relc::chamfer_l1_diff(tp, p, b).item();
  };
  CHECK(oracle::fd_worst_rel_error(eval, at, analytic, 1e-6) < 1e-3);
}

TEST_CASE("denoise batch is seeded, sized and locally supported") {
  Rng rng(77);
  PointCloud gt = random_cloud(200, rng);
  relc::DenoiseBatch a = relc::build_denoise_batch(gt, 5, 0.05, 16, 909);
  relc::DenoiseBatch b = relc::build_denoise_batch(gt, 5, 0.05, 16, 909);
  REQUIRE(a.clean.count() == 5);
  REQUIRE(a.noisy.count() == 5);
  REQUIRE(a.patches.size() == 5);
  for (const auto& p : a.patches) CHECK(p.count() == 16);
  // Determinism.
  for (int i = 0; i < 5; ++i) {
    CHECK(a.noisy[i].x == b.noisy[i].x);
    CHECK(a.clean[i].y == b.clean[i].y);
  }
  // Clean centers are gt members; patches are their neighborhoods.
  for (int i = 0; i < 5; ++i) {
    double best = 1e300;
    for (int j = 0; j < gt.count(); ++j) best = std::min(best, relc::distance(a.clean[i], gt[j]));
    CHECK(best == 0.0);
    CHECK(oracle::nearest(a.clean[i], PointCloud(a.patches[static_cast<size_t>(i)].points()))
              .second == doctest::Approx(0.0));
  }

  relc::DenoiseBatch other = relc::build_denoise_batch(gt, 5, 0.05, 16, 910);
  bool same = true;
  for (int i = 0; i < 5; ++i) same = same && other.noisy[i].x == a.noisy[i].x;
  CHECK_FALSE(same);
}

TEST_CASE("loss total equals j0 + j1 + lambda * j_denoise bitwise") {
  Rng rng(78);
  PointCloud gt = random_cloud(60, rng);
  PointCloud proxies = random_cloud(10, rng);
  PointCloud dense = random_cloud(40, rng);

  relc::DenoiseBatch batch = relc::build_denoise_batch(gt, 3, 0.05, 8, 4242);
  // Fake rebuilt patches: 4 points per query.
  const int u = 4;
  PointCloud rebuilt = random_cloud(3 * u, rng);

  Tape t;
  Tensor pc = cloud_tensor(t, proxies, true);
  Tensor dp = cloud_tensor(t, dense, true);
  Tensor dn = cloud_tensor(t, rebuilt, true);
  const double lambda = 0.37;
  relc::LossBreakdown lb = relc::loss_total(t, pc, dp, gt, dn, batch.patches, lambda);

  CHECK(lb.lambda == lambda);
  CHECK_FALSE(lb.denoise_empty);
  CHECK(lb.total == lb.j0 + lb.j1 + lambda * lb.j_denoise);  // exact identity
  CHECK(lb.node.item() == lb.total);

  // j0/j1 match the host metric on the same clouds.
  CHECK(lb.j0 == doctest::Approx(relc::chamfer_l1(proxies, gt)).epsilon(1e-12));
  CHECK(lb.j1 == doctest::Approx(relc::chamfer_l1(dense, gt)).epsilon(1e-12));

  // j_denoise is the mean patch chamfer.
  double want = 0.0;
  for (int q = 0; q < 3; ++q) {
    PointCloud patch_pred;
    for (int j = 0; j < u; ++j) patch_pred.add(rebuilt[q * u + j]);
    want += oracle::chamfer_l1(patch_pred, batch.patches[static_cast<size_t>(q)]);
  }
  want /= 3.0;
  CHECK(lb.j_denoise == doctest::Approx(want).epsilon(1e-12));

  // Backward reaches all three prediction tensors.
  t.backward(lb.node);
  CHECK_FALSE(pc.grad().empty());
  CHECK_FALSE(dp.grad().empty());
  CHECK_FALSE(dn.grad().empty());
}

TEST_CASE("loss total without denoise queries flags the empty term") {
  Rng rng(79);
  PointCloud gt = random_cloud(30, rng);
  Tape t;
  Tensor pc = cloud_tensor(t, random_cloud(5, rng), true);
  Tensor dp = cloud_tensor(t, random_cloud(20, rng), true);
  relc::LossBreakdown lb = relc::loss_total(t, pc, dp, gt, Tensor{}, {}, 1.0);
  CHECK(lb.denoise_empty);
  CHECK(lb.j_denoise == 0.0);
  CHECK(lb.total == lb.j0 + lb.j1);
  CHECK(lb.node.item() == lb.total);
}
