// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Autodiff core: forward values against dense oracles, gradients against
// central differences, and the optimizer against hand-computed updates.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "oracles.hpp"
#include "relc/error.hpp"
#include "relc/nn.hpp"
#include "relc/rng.hpp"
#include "relc/tensor.hpp"

using relc::Rng;
using relc::Shape;
using relc::Tape;
using relc::Tensor;

namespace {

std::vector<double> random_values(std::int64_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = relc::uniform(rng, lo, hi);
  return v;
}

// Scalarizes any tensor as sum of squares, so every element influences the
// loss and FD probes see a generic downstream gradient.
Tensor sum_sq(Tape& t, Tensor y) {
  Tensor flat = t.reshape(y, Shape{1, static_cast<int>(y.numel())});
  return t.sum_over_axis(t.mul(flat, flat), 1);
}

// Runs `build` twice: once recording the analytic gradient of sum-of-squares
// w.r.t. the single leaf, then under the central-difference probe.
double op_fd_error(const Shape& shape, const std::vector<double>& at,
                   const std::function<Tensor(Tape&, Tensor)>& build) {
  Tape t;
  Tensor x = t.leaf(shape, at, true);
  Tensor loss = sum_sq(t, build(t, x));
  t.backward(loss);
  std::vector<double> analytic(x.grad().begin(), x.grad().end());

  auto eval = [&](const std::vector<double>& p) {
    Tape tp;
    Tensor xp = tp.leaf(shape, p, true);
    return sum_sq(tp, build(tp, xp)).item();
  };
  return oracle::fd_worst_rel_error(eval, at, analytic);
}

}  // namespace

TEST_CASE("shape basics") {
  Shape s{3, 4};
  CHECK(s.rank() == 2);
  CHECK(s.numel() == 12);
  CHECK(s.last() == 4);
  CHECK(s == Shape{3, 4});
  CHECK(s != Shape{4, 3});
  Shape r3{2, 5, 7};
  CHECK(r3.numel() == 70);
}

TEST_CASE("matmul forward matches the dense oracle") {
  Rng rng(42);
  const int n = 7, t = 5, d = 4;
  auto av = random_values(n * t, rng);
  auto bv = random_values(t * d, rng);
  auto want = oracle::matmul(av, n, t, bv, d);

  Tape tape;
  Tensor c = tape.matmul(tape.constant(Shape{n, t}, av), tape.constant(Shape{t, d}, bv));
  REQUIRE(c.shape() == Shape{n, d});
  for (int i = 0; i < n * d; ++i)
    CHECK(c.at(i) == doctest::Approx(want[static_cast<size_t>(i)]).epsilon(1e-12));

  // Rank-3 left operand: rows are flattened, result keeps the leading dims.
  auto a3 = random_values(2 * 3 * t, rng);
  auto want3 = oracle::matmul(a3, 6, t, bv, d);
  Tensor c3 = tape.matmul(tape.constant(Shape{2, 3, t}, a3), tape.constant(Shape{t, d}, bv));
  REQUIRE(c3.shape() == Shape{2, 3, d});
  for (int i = 0; i < 6 * d; ++i)
    CHECK(c3.at(i) == doctest::Approx(want3[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("softmax of a uniform row is uniform") {
  Tape t;
  Tensor y = t.softmax(t.constant(Shape{1, 2}, {0.0, 0.0}));
  CHECK(y.at(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y.at(1) == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng(7);
  auto xv = random_values(3 * 5, rng, -4.0, 4.0);
  auto want = oracle::softmax_rows(xv, 3, 5);
  Tensor s = t.softmax(t.constant(Shape{3, 5}, xv));
  for (int i = 0; i < 15; ++i)
    CHECK(s.at(i) == doctest::Approx(want[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("layer_norm matches the dense oracle and centers constant rows") {
  Rng rng(9);
  const int n = 4, d = 6;
  auto xv = random_values(n * d, rng, -2.0, 2.0);
  auto gain = random_values(d, rng, 0.5, 1.5);
  auto bias = random_values(d, rng, -0.3, 0.3);
  auto want = oracle::layer_norm_rows(xv, n, d, gain, bias, 1e-8);

  Tape t;
  Tensor y = t.layer_norm(t.constant(Shape{n, d}, xv), t.constant(Shape{d}, gain),
                          t.constant(Shape{d}, bias));
  for (int i = 0; i < n * d; ++i)
    CHECK(y.at(i) == doctest::Approx(want[static_cast<size_t>(i)]).epsilon(1e-12));

  // A constant row has zero variance, so the output collapses to the bias.
  Tensor flat = t.layer_norm(t.constant(Shape{1, 3}, {5.0, 5.0, 5.0}),
                             t.constant(Shape{3}, {1.0, 1.0, 1.0}),
                             t.constant(Shape{3}, {0.25, -0.5, 0.75}));
  CHECK(flat.at(0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(flat.at(1) == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(flat.at(2) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("relu forward and backward mask") {
  Tape t;
  Tensor x = t.leaf(Shape{1, 3}, {-1.0, 0.0, 2.0}, true);
  Tensor y = t.relu(x);
  CHECK(y.at(0) == 0.0);
  CHECK(y.at(1) == 0.0);
  CHECK(y.at(2) == 2.0);
  t.backward(t.sum_over_axis(y, 1));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);  // subgradient 0 at the kink
  CHECK(x.grad()[2] == 1.0);
}

TEST_CASE("max_over_axis routes gradient to the argmax, ties to the smaller index") {
  Tape t;
  Tensor x = t.leaf(Shape{2, 3}, {3.0, 7.0, 7.0, -1.0, -5.0, -1.0}, true);
  Tensor y = t.max_over_axis(x, 1);
  REQUIRE(y.shape() == Shape{2, 1});
  CHECK(y.at(0) == 7.0);
  CHECK(y.at(1) == -1.0);
  t.backward(t.sum_over_axis(t.sum_over_axis(y, 1), 0));
  const std::vector<double> want = {0.0, 1.0, 0.0, 1.0, 0.0, 0.0};
  for (int i = 0; i < 6; ++i) CHECK(x.grad()[static_cast<size_t>(i)] == want[static_cast<size_t>(i)]);
}

TEST_CASE("reduction output shapes follow the axis conventions") {
  Tape t;
  Tensor r2 = t.constant(Shape{4, 6}, std::vector<double>(24, 1.0));
  CHECK(t.sum_over_axis(r2, 0).shape() == Shape{1, 6});
  CHECK(t.sum_over_axis(r2, 1).shape() == Shape{4, 1});
  CHECK(t.mean_over_axis(r2, 1).at(0) == doctest::Approx(1.0));
  Tensor r3 = t.constant(Shape{2, 3, 5}, std::vector<double>(30, 2.0));
  CHECK(t.max_over_axis(r3, 1).shape() == Shape{2, 5});
  CHECK(t.sum_over_axis(r3, 2).shape() == Shape{2, 3});
  CHECK(t.sum_over_axis(r3, 1).at(0) == doctest::Approx(6.0));
}

TEST_CASE("abs and sqrt take subgradient zero at zero") {
  Tape t;
  Tensor x = t.leaf(Shape{1, 3}, {-2.0, 0.0, 3.0}, true);
  Tensor y = t.abs(x);
  CHECK(y.at(0) == 2.0);
  CHECK(y.at(1) == 0.0);
  t.backward(t.sum_over_axis(y, 1));
  CHECK(x.grad()[0] == -1.0);
  CHECK(x.grad()[1] == 0.0);
  CHECK(x.grad()[2] == 1.0);

  Tape t2;
  Tensor z = t2.leaf(Shape{1, 2}, {0.0, 4.0}, true);
  Tensor s = t2.sqrt(z);
  CHECK(s.at(0) == 0.0);
  CHECK(s.at(1) == 2.0);
  t2.backward(t2.sum_over_axis(s, 1));
  CHECK(z.grad()[0] == 0.0);
  CHECK(z.grad()[1] == doctest::Approx(0.25));
}

TEST_CASE("radial_cap squashes rows into the ball and keeps directions") {
  Tape t;
  Tensor x = t.leaf(Shape{3, 3}, {9.0, 0.0, 0.0, 0.3, -0.4, 0.0, 0.0, 0.0, 0.0}, false);
  Tensor y = t.radial_cap(x, 0.5);
  // Long rows approach the radius along their own axis (not radius/sqrt(3)).
  CHECK(y.at(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(y.at(1) == 0.0);
  // Short rows shrink by tanh(|v|)/|v| with direction preserved.
  const double g = 0.5 * std::tanh(0.5) / 0.5;
  CHECK(y.at(3) == doctest::Approx(0.3 * g));
  CHECK(y.at(4) == doctest::Approx(-0.4 * g));
  // The zero row maps to zero (series path).
  CHECK(y.at(6) == 0.0);
  for (int r = 0; r < 3; ++r) {
    double n2 = 0.0;
    for (int j = 0; j < 3; ++j) n2 += y.at(3 * r + j) * y.at(3 * r + j);
    CHECK(std::sqrt(n2) <= 0.5 + 1e-12);
  }
}

TEST_CASE("bias add broadcasts over rows and accumulates column sums backward") {
  Tape t;
  Tensor x = t.constant(Shape{2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = t.leaf(Shape{3}, {10.0, 20.0, 30.0}, true);
  Tensor y = t.add(x, b);
  CHECK(y.at(0) == 11.0);
  CHECK(y.at(5) == 36.0);
  t.backward(t.sum_over_axis(t.sum_over_axis(y, 1), 0));
  REQUIRE(b.grad().size() == 3);
  for (int j = 0; j < 3; ++j) CHECK(b.grad()[static_cast<size_t>(j)] == 2.0);  // one per row
}

TEST_CASE("gather and broadcast ops move values where expected") {
  Tape t;
  Tensor x = t.constant(Shape{4, 2}, {0, 1, 10, 11, 20, 21, 30, 31});
  Tensor g = t.gather_rows(x, {2, 0, 2});
  REQUIRE(g.shape() == Shape{3, 2});
  CHECK(g.at(0) == 20.0);
  CHECK(g.at(2) == 0.0);
  CHECK(g.at(4) == 20.0);

  Tensor nb = t.gather_neighbors(x, {1, 3, 0, 0}, 2);
  REQUIRE(nb.shape() == Shape{2, 2, 2});
  CHECK(nb.at(0) == 10.0);
  CHECK(nb.at(2) == 30.0);
  CHECK(nb.at(4) == 0.0);

  Tensor bm = t.broadcast_mid(t.constant(Shape{2, 2}, {1, 2, 3, 4}), 3);
  REQUIRE(bm.shape() == Shape{2, 3, 2});
  CHECK(bm.at(0) == 1.0);
  CHECK(bm.at(4) == 1.0);
  CHECK(bm.at(6) == 3.0);

  Tensor rp = t.repeat_rows(t.constant(Shape{1, 2}, {7, 8}), 3);
  REQUIRE(rp.shape() == Shape{3, 2});
  CHECK(rp.at(4) == 7.0);

  Tensor mid = t.gather_mid(bm, {2, 0, 0, 1}, 2);
  REQUIRE(mid.shape() == Shape{2, 2, 2});
  CHECK(mid.at(0) == 1.0);
  CHECK(mid.at(4) == 3.0);

  Tensor tr = t.transpose(t.constant(Shape{2, 3}, {1, 2, 3, 4, 5, 6}));
  REQUIRE(tr.shape() == Shape{3, 2});
  CHECK(tr.at(1) == 4.0);
  CHECK(tr.at(2) == 2.0);
}

TEST_CASE("every differentiable op passes a central-difference probe") {
  Rng rng(1234);
  const double tol = 1e-4;

  auto vals = [&](const Shape& s) { return random_values(s.numel(), rng, -1.5, 1.5); };

  SUBCASE("matmul lhs") {
    Shape s{3, 4};
    auto bfix = random_values(4 * 2, rng);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.matmul(x, t.constant(Shape{4, 2}, bfix));
          }) < tol);
  }
  SUBCASE("matmul rhs") {
    Shape s{4, 2};
    auto afix = random_values(3 * 4, rng);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.matmul(t.constant(Shape{3, 4}, afix), x);
          }) < tol);
  }
  SUBCASE("matmul rank3") {
    Shape s{2, 3, 4};
    auto bfix = random_values(4 * 2, rng);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.matmul(x, t.constant(Shape{4, 2}, bfix));
          }) < tol);
  }
  SUBCASE("add sub mul") {
    Shape s{3, 4};
    auto other = random_values(12, rng);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            Tensor o = t.constant(s, other);
            return t.mul(t.sub(t.add(x, o), t.mul(x, o)), x);
          }) < tol);
  }
  SUBCASE("bias add") {
    Shape s{4};
    auto base = random_values(3 * 4, rng);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.add(t.constant(Shape{3, 4}, base), x);
          }) < tol);
  }
  SUBCASE("scale") {
    Shape s{2, 5};
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.scale(x, -1.7); }) < tol);
  }
  SUBCASE("activations") {
    Shape s{3, 4};
    // Away from kinks: |x| in [0.1, 1.5].
    auto at = vals(s);
    for (auto& v : at) v = (v < 0 ? -1 : 1) * (0.1 + std::abs(v));
    CHECK(op_fd_error(s, at, [&](Tape& t, Tensor x) { return t.relu(x); }) < tol);
    CHECK(op_fd_error(s, at, [&](Tape& t, Tensor x) { return t.leaky_relu(x, 0.2); }) < tol);
    CHECK(op_fd_error(s, at, [&](Tape& t, Tensor x) { return t.sigmoid(x); }) < tol);
    CHECK(op_fd_error(s, at, [&](Tape& t, Tensor x) { return t.tanh(x); }) < tol);
    CHECK(op_fd_error(s, at, [&](Tape& t, Tensor x) { return t.abs(x); }) < tol);
  }
  SUBCASE("sqrt") {
    Shape s{2, 4};
    auto at = random_values(8, rng, 0.2, 2.0);
    CHECK(op_fd_error(s, at, [&](Tape& t, Tensor x) { return t.sqrt(x); }) < tol);
  }
  SUBCASE("radial_cap") {
    Shape s{5, 3};
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.radial_cap(x, 0.8); }) < tol);
    // Near the origin the series fallback must stay smooth too.
    auto tiny = random_values(15, rng, -1e-7, 1e-7);
    CHECK(op_fd_error(s, tiny, [&](Tape& t, Tensor x) { return t.radial_cap(x, 1.0); }) < tol);
  }
  SUBCASE("reductions rank2") {
    Shape s{3, 4};
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.sum_over_axis(x, 0); }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.sum_over_axis(x, 1); }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.mean_over_axis(x, 1); }) < tol);
  }
  SUBCASE("reductions rank3") {
    Shape s{2, 3, 4};
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.sum_over_axis(x, 1); }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.mean_over_axis(x, 2); }) < tol);
  }
  SUBCASE("max_over_axis") {
    Shape s{3, 5};
    // Distinct magnitudes keep the argmax stable under the probe step.
    std::vector<double> at(15);
    for (int i = 0; i < 15; ++i) at[static_cast<size_t>(i)] = 0.13 * i * (i % 2 ? 1 : -1);
    CHECK(op_fd_error(s, at, [&](Tape& t, Tensor x) { return t.max_over_axis(x, 1); }) < tol);
  }
  SUBCASE("softmax") {
    Shape s{3, 4};
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.softmax(x); }) < tol);
  }
  SUBCASE("layer_norm input") {
    Shape s{3, 4};
    auto gain = random_values(4, rng, 0.5, 1.5);
    auto bias = random_values(4, rng, -0.5, 0.5);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.layer_norm(x, t.constant(Shape{4}, gain), t.constant(Shape{4}, bias));
          }) < tol);
  }
  SUBCASE("layer_norm gain and bias") {
    Shape s{4};
    auto base = random_values(3 * 4, rng);
    auto bias = random_values(4, rng);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.layer_norm(t.constant(Shape{3, 4}, base), x, t.constant(Shape{4}, bias));
          }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.layer_norm(t.constant(Shape{3, 4}, base), t.constant(Shape{4}, bias), x);
          }) < tol);
  }
  SUBCASE("concat") {
    Shape s{3, 2};
    auto other = random_values(3 * 3, rng);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.concat_last(x, t.constant(Shape{3, 3}, other));
          }) < tol);
    auto rows = random_values(2 * 2, rng);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.concat_rows(t.constant(Shape{2, 2}, rows), x);
          }) < tol);
  }
  SUBCASE("gathers") {
    Shape s{5, 3};
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.gather_rows(x, {4, 0, 0, 2});
          }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.gather_neighbors(x, {0, 1, 1, 2, 4, 4}, 3);
          }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.gather_mid(t.broadcast_mid(x, 4), {3, 1, 0, 2, 1, 1, 3, 0, 2, 2}, 2);
          }) < tol);
  }
  SUBCASE("shape movers") {
    Shape s{2, 6};
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.transpose(x); }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) {
            return t.reshape(x, Shape{3, 2, 2});
          }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.repeat_rows(t.sum_over_axis(x, 0), 3); }) < tol);
    CHECK(op_fd_error(s, vals(s), [&](Tape& t, Tensor x) { return t.broadcast_mid(x, 3); }) < tol);
  }
}

TEST_CASE("constants do not accumulate gradients") {
  Tape t;
  Tensor c = t.constant(Shape{1, 2}, {1.0, 2.0});
  Tensor x = t.leaf(Shape{1, 2}, {3.0, 4.0}, true);
  Tensor y = t.mul(c, x);
  t.backward(t.sum_over_axis(y, 1));
  CHECK(c.grad().empty());
  REQUIRE(x.grad().size() == 2);
  CHECK(x.grad()[0] == 1.0);
  CHECK(x.grad()[1] == 2.0);
}

TEST_CASE("backward accumulates across shared subexpressions") {
  Tape t;
  Tensor x = t.leaf(Shape{1, 1}, {3.0}, true);
  Tensor y = t.add(t.mul(x, x), t.scale(x, 2.0));  // x^2 + 2x
  t.backward(y);
  CHECK(x.grad()[0] == doctest::Approx(8.0));  // 2*3 + 2
}

TEST_CASE("mlp forward applies weights, biases and activations in order") {
  relc::ParamStore store;
  Rng rng(11);
  relc::MlpSpec spec;
  spec.dims = {2, 3, 1};
  register_mlp(store, "net", spec, rng);
  CHECK(store.contains("net.w0"));
  CHECK(store.contains("net.b1"));
  CHECK(store.scalar_count() == 2 * 3 + 3 + 3 * 1 + 1);

  // Overwrite with hand values: w0 = identity-ish, check one number end to end.
  store.at("net.w0").value = {1, 0, 0, 0, 1, 0};
  store.at("net.b0").value = {0, 0, 1};
  store.at("net.w1").value = {1, 1, 1};
  store.at("net.b1").value = {0.5};
  Tape t;
  relc::ParamContext ctx(t, store);
  Tensor y = mlp_forward(t, ctx, "net", spec, t.constant(Shape{1, 2}, {2.0, -10.0}));
  // Hidden: leaky_relu([2, -10, 1], 0.2) = [2, -2, 1]; out = 2 - 2 + 1 + 0.5.
  CHECK(y.item() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("mlp gradients pass the probe end to end") {
  relc::ParamStore store;
  Rng rng(5);
  relc::MlpSpec spec;
  spec.dims = {3, 4, 2};
  spec.final_act = relc::Act::Tanh;
  register_mlp(store, "m", spec, rng);

  std::vector<double> xv = random_values(2 * 3, rng);
  for (const auto& name : store.names()) {
    const auto& p = store.at(name);
    Tape t;
    relc::ParamContext ctx(t, store);
    Tensor leaf = t.leaf(p.shape, p.value, true);
    ctx.bind(name, leaf);
    Tensor loss = sum_sq(t, mlp_forward(t, ctx, "m", spec, t.constant(Shape{2, 3}, xv)));
    t.backward(loss);
    std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());

    auto eval = [&](const std::vector<double>& vals) {
      Tape tp;
      relc::ParamContext cp(tp, store);
      cp.bind(name, tp.leaf(p.shape, vals, true));
      return sum_sq(tp, mlp_forward(tp, cp, "m", spec, tp.constant(Shape{2, 3}, xv))).item();
    };
    CHECK(oracle::fd_worst_rel_error(eval, p.value, analytic) < 1e-4);
  }
}

TEST_CASE("adamw single step from the hand example") {
  relc::ParamStore store;
  store.add("p", Shape{1}, {1.0});
  relc::GradMap g;
  g["p"] = {1.0};
  relc::AdamConfig cfg;
  cfg.lr = 0.1;
  adamw_step(store, g, cfg, 1);
  // mhat = vhat = 1 after bias correction, so p <- 1 - 0.1 * 1/(1+eps).
  CHECK(store.at("p").value[0] == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("adamw drives a quadratic to its minimum") {
  relc::ParamStore store;
  store.add("p", Shape{1}, {0.0});
  relc::AdamConfig cfg;
  cfg.lr = 0.05;
  for (int s = 1; s <= 2000; ++s) {
    relc::GradMap g;
    g["p"] = {2.0 * (store.at("p").value[0] - 3.0)};
    adamw_step(store, g, cfg, s);
  }
  CHECK(std::abs(store.at("p").value[0] - 3.0) < 1e-3);
}

TEST_CASE("adamw decoupled weight decay with zero gradient") {
  relc::ParamStore store;
  store.add("p", Shape{1}, {1.0});
  relc::AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.5;
  adamw_step(store, {}, cfg, 1);  // no gradient entry at all
  CHECK(store.at("p").value[0] == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("adamw rejects non-finite gradients") {
  relc::ParamStore store;
  store.add("p", Shape{1}, {1.0});
  relc::GradMap g;
  g["p"] = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(adamw_step(store, g, relc::AdamConfig{}, 1), relc::DivergedError);
}

TEST_CASE("param store preserves registration order and rejects duplicates") {
  relc::ParamStore store;
  store.add("b", Shape{1}, {0.0});
  store.add("a", Shape{2}, {0.0, 0.0});
  REQUIRE(store.names().size() == 2);
  CHECK(store.names()[0] == "b");
  CHECK(store.names()[1] == "a");
  CHECK_THROWS_AS(store.add("b", Shape{1}, {0.0}), std::invalid_argument);
}

TEST_CASE("frozen contexts bind constants and collect no gradients") {
  relc::ParamStore store;
  store.add("w", Shape{1, 1}, {2.0});
  Tape t;
  relc::ParamContext ctx(t, store, /*trainable=*/false);
  Tensor y = t.mul(ctx("w"), t.leaf(Shape{1, 1}, {3.0}, true));
  t.backward(y);
  relc::GradMap grads;
  ctx.add_grads(grads);
  CHECK(grads.empty());
}
