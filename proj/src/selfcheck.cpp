// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "relc/geometry.hpp"
#include "relc/losses.hpp"
#include "relc/relation.hpp"
#include "relc/rng.hpp"

namespace relc {

double fd_max_rel_error(
    const std::function<Tensor(Tape&, const std::vector<Tensor>&)>& build,
    const std::vector<std::pair<Shape, std::vector<double>>>& leaves, double eps) {
  auto eval = [&](const std::vector<std::vector<double>>& vals) {
    Tape tape;
    std::vector<Tensor> bound;
    for (size_t i = 0; i < leaves.size(); ++i)
      bound.push_back(tape.leaf(leaves[i].first, vals[i], true));
    return build(tape, bound).item();
  };

  std::vector<std::vector<double>> vals;
  for (const auto& [shape, v] : leaves) vals.push_back(v);

  // analytic pass
  Tape tape;
  std::vector<Tensor> bound;
  for (size_t i = 0; i < leaves.size(); ++i)
    bound.push_back(tape.leaf(leaves[i].first, vals[i], true));
  Tensor loss = build(tape, bound);
  tape.backward(loss);

  double worst = 0.0;
  for (size_t i = 0; i < leaves.size(); ++i) {
    auto grad = bound[i].grad();
    for (size_t j = 0; j < vals[i].size(); ++j) {
      auto perturbed = vals;
      perturbed[i][j] = vals[i][j] + eps;
      const double up = eval(perturbed);
      perturbed[i][j] = vals[i][j] - eps;
      const double dn = eval(perturbed);
      const double fd = (up - dn) / (2.0 * eps);
      const double analytic = grad.empty() ? 0.0 : grad[j];
      worst = std::max(worst, std::fabs(analytic - fd) / (std::fabs(fd) + 1e-8));
    }
  }
  return worst;
}

namespace {

PointCloud random_cloud(Rng& g, int n) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.add({uniform(g, -1.0, 1.0), uniform(g, -1.0, 1.0), uniform(g, -1.0, 1.0)});
  return c;
}

bool report(const char* name, bool ok, double detail = std::numeric_limits<double>::quiet_NaN()) {
  if (std::isnan(detail))
    std::printf("[%s] selftest %s\n", ok ? "PASS" : "FAIL", name);
  else
    std::printf("[%s] selftest %s (worst %.3g)\n", ok ? "PASS" : "FAIL", name, detail);
  return ok;
}

bool check_knn_oracle() {
  Rng g(mix_seed(11, 1));
  for (int t = 0; t < 20; ++t) {
    const int n = 16 + uniform_index(g, 96);
    const int k = 1 + uniform_index(g, 8);
    PointCloud ref = random_cloud(g, n);
    PointCloud q = random_cloud(g, 8);
    NeighborIndex idx = knn(q, ref, k);
    for (int qi = 0; qi < q.count(); ++qi) {
      std::vector<std::pair<double, int>> all;
      for (int i = 0; i < n; ++i) all.emplace_back(distance2(q[qi], ref[i]), i);
      std::sort(all.begin(), all.end());
      for (int j = 0; j < k; ++j)
        if (idx.id(qi, j) != all[static_cast<size_t>(j)].second) return false;
    }
  }
  return true;
}

bool check_chamfer_oracle() {
  Rng g(mix_seed(11, 2));
  for (int t = 0; t < 20; ++t) {
    PointCloud a = random_cloud(g, 8 + uniform_index(g, 56));
    PointCloud b = random_cloud(g, 8 + uniform_index(g, 56));
    double s1 = 0.0, s2 = 0.0, q1 = 0.0, q2 = 0.0;
    for (const auto& p : a.points()) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : b.points()) best = std::min(best, distance2(p, r));
      s1 += std::sqrt(best);
      q1 += best;
    }
    for (const auto& p : b.points()) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : a.points()) best = std::min(best, distance2(p, r));
      s2 += std::sqrt(best);
      q2 += best;
    }
    const double l1 = s1 / a.count() + s2 / b.count();
    const double l2 = q1 / a.count() + q2 / b.count();
    if (std::fabs(chamfer_l1(a, b) - l1) > 1e-12) return false;
    if (std::fabs(chamfer_l2(a, b) - l2) > 1e-12) return false;
  }
  return true;
}

double check_op_grads() {
  Rng g(mix_seed(11, 3));
  auto randv = [&](int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (auto& x : v) x = uniform(g, -1.0, 1.0);
    return v;
  };
  double worst = 0.0;

  worst = std::max(worst, fd_max_rel_error(
      [](Tape& t, const std::vector<Tensor>& in) {
        Tensor c = t.matmul(in[0], in[1]);
        return t.mean_over_axis(t.mean_over_axis(t.mul(c, c), 1), 0);
      },
      {{Shape{3, 4}, randv(12)}, {Shape{4, 2}, randv(8)}}));

  worst = std::max(worst, fd_max_rel_error(
      [](Tape& t, const std::vector<Tensor>& in) {
        Tensor s = t.softmax(in[0]);
        return t.mean_over_axis(t.mean_over_axis(t.mul(s, s), 1), 0);
      },
      {{Shape{3, 5}, randv(15)}}));

  worst = std::max(worst, fd_max_rel_error(
      [](Tape& t, const std::vector<Tensor>& in) {
        Tensor y = t.layer_norm(in[0], in[1], in[2]);
        return t.mean_over_axis(t.mean_over_axis(t.mul(y, y), 1), 0);
      },
      {{Shape{4, 6}, randv(24)}, {Shape{6}, randv(6)}, {Shape{6}, randv(6)}}));

  worst = std::max(worst, fd_max_rel_error(
      [](Tape& t, const std::vector<Tensor>& in) {
        Tensor y = t.tanh(t.add(in[0], in[1]));
        return t.mean_over_axis(t.mean_over_axis(t.mul(y, y), 1), 0);
      },
      {{Shape{3, 4}, randv(12)}, {Shape{4}, randv(4)}}));

  return worst;
}

double check_lgrp_grad() {
  Rng g(mix_seed(11, 4));
  const int n = 12, k = 4, d = 3;
  PointCloud cloud = random_cloud(g, n);
  NeighborIndex index = knn(cloud, cloud, k);

  LgrpConfig cfg;
  cfg.k = k;
  cfg.m_subset = 2;
  cfg.in_dim = d;
  cfg.out_dim = 5;
  cfg.weight_hidden = 8;
  ParamStore store;
  Rng init(mix_seed(11, 5));
  register_lgrp(store, "lgrp", cfg, init);

  std::vector<double> coords;
  for (const auto& p : cloud.points()) {
    coords.push_back(p.x);
    coords.push_back(p.y);
    coords.push_back(p.z);
  }

  // bind every parameter as an fd leaf after the fixed coord/feat leaves
  std::vector<std::pair<Shape, std::vector<double>>> leaves;
  leaves.emplace_back(Shape{n, d}, coords);  // features = coordinates here
  for (const auto& name : store.names()) leaves.emplace_back(store.at(name).shape,
                                                             store.at(name).value);

  auto build = [&](Tape& t, const std::vector<Tensor>& in) {
    Tensor coord_t = t.constant(Shape{n, 3}, coords);
    ParamContext ctx(t, store);
    size_t li = 1;
    for (const auto& name : store.names()) ctx.bind(name, in[li++]);
    Tensor nbr_c = t.gather_neighbors(coord_t, index.ids, k);
    Tensor nbr_f = t.gather_neighbors(in[0], index.ids, k);
    Tensor out = lgrp_forward(t, ctx, "lgrp", cfg, coord_t, in[0], nbr_c, nbr_f, index);
    return t.mean_over_axis(t.mean_over_axis(t.mul(out, out), 1), 0);
  };
  return fd_max_rel_error(build, leaves);
}

}  // namespace

bool run_selftest() {
  bool ok = true;
  ok &= report("knn vs brute-force oracle", check_knn_oracle());
  ok &= report("chamfer vs brute-force oracle", check_chamfer_oracle());
  const double op_worst = check_op_grads();
  ok &= report("core op gradients vs finite differences", op_worst < 1e-4, op_worst);
  const double lgrp_worst = check_lgrp_grad();
  ok &= report("lgrp block gradient vs finite differences", lgrp_worst < 1e-4, lgrp_worst);
  return ok;
}

}  // namespace relc
