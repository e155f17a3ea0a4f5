// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace relc {

namespace {
constexpr double kLayerNormEps = 1e-8;

// Splits dims at `axis` into (outer, reduced, inner) extents for a
// row-major walk: flat = (o * red + t) * inner + i.
struct AxisView {
  std::int64_t outer = 1, red = 1, inner = 1;
};

AxisView axis_view(const Shape& s, int axis) {
  AxisView v;
  for (int i = 0; i < axis; ++i) v.outer *= s.dim(i);
  v.red = s.dim(axis);
  for (int i = axis + 1; i < s.rank(); ++i) v.inner *= s.dim(i);
  return v;
}

Shape reduced_shape(const Shape& s, int axis) {
  if (s.rank() == 2) return axis == 0 ? Shape{1, s.dim(1)} : Shape{s.dim(0), 1};
  if (s.rank() == 3) {
    if (axis == 1) return Shape{s.dim(0), s.dim(2)};
    if (axis == 2) return Shape{s.dim(0), s.dim(1)};
  }
  throw std::invalid_argument("reduce: unsupported rank/axis " + s.str() + " axis " +
                              std::to_string(axis));
}

}  // namespace

// ---------------------------------------------------------------------------
// Shape

Shape::Shape(std::initializer_list<int> dims) : Shape(std::vector<int>(dims)) {}

Shape::Shape(const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 3) throw std::invalid_argument("shape rank must be 1..3");
  rank_ = static_cast<int>(dims.size());
  for (size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] <= 0) throw std::invalid_argument("shape dims must be positive");
    dims_[i] = dims[i];
  }
}

std::int64_t Shape::numel() const {
  std::int64_t n = 1;
  for (int i = 0; i < rank_; ++i) n *= dims_[static_cast<size_t>(i)];
  return n;
}

bool Shape::operator==(const Shape& o) const {
  if (rank_ != o.rank_) return false;
  for (int i = 0; i < rank_; ++i)
    if (dims_[static_cast<size_t>(i)] != o.dims_[static_cast<size_t>(i)]) return false;
  return true;
}

std::string Shape::str() const {
  std::string s = "(";
  for (int i = 0; i < rank_; ++i)
    s += (i ? "," : "") + std::to_string(dims_[static_cast<size_t>(i)]);
  return s + ")";
}

// ---------------------------------------------------------------------------
// Tensor

const Shape& Tensor::shape() const { return tape_->shape_of(node_); }
std::span<const double> Tensor::values() const { return tape_->values_of(node_); }
std::span<const double> Tensor::grad() const { return tape_->grad_of(node_); }

double Tensor::item() const {
  if (numel() != 1) throw std::invalid_argument("item(): tensor has " + shape().str());
  return values()[0];
}

double Tensor::at(std::int64_t i) const { return values()[static_cast<size_t>(i)]; }

// ---------------------------------------------------------------------------
// Tape plumbing

std::span<const double> Tape::values_of(int node) const {
  const auto& v = nodes_[static_cast<size_t>(node)].v;
  return {v.data(), v.size()};
}

std::span<const double> Tape::grad_of(int node) const {
  const auto& g = nodes_[static_cast<size_t>(node)].g;
  return {g.data(), g.size()};
}

std::vector<double>& Tape::grad_buf(int node) {
  Node& n = nodes_[static_cast<size_t>(node)];
  if (n.g.empty()) n.g.assign(static_cast<size_t>(n.shape.numel()), 0.0);
  return n.g;
}

Tensor Tape::emit(const Shape& shape, std::vector<double> values, bool requires_grad,
                  std::function<void(Tape&)> back) {
  if (static_cast<std::int64_t>(values.size()) != shape.numel())
    throw std::invalid_argument("tensor values do not match shape " + shape.str());
  Node n;
  n.shape = shape;
  n.v = std::move(values);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::leaf(const Shape& shape, std::vector<double> values, bool requires_grad) {
  return emit(shape, std::move(values), requires_grad, nullptr);
}

Tensor Tape::constant(const Shape& shape, std::vector<double> values) {
  return emit(shape, std::move(values), false, nullptr);
}

Tensor Tape::constant_scalar(double v) { return constant(Shape{1, 1}, {v}); }

void Tape::backward(Tensor loss) {
  if (loss.tape_ != this) throw std::invalid_argument("backward: tensor not on this tape");
  if (loss.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
  grad_buf(loss.node_)[0] = 1.0;
  for (int i = loss.node_; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.back && !n.g.empty() && n.requires_grad) n.back(*this);
  }
}

// ---------------------------------------------------------------------------
// Ops

Tensor Tape::matmul(Tensor a, Tensor b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.rank() != 2 || (sa.rank() != 2 && sa.rank() != 3) || sa.last() != sb.dim(0))
    throw std::invalid_argument("matmul: incompatible " + sa.str() + " x " + sb.str());
  const std::int64_t rows = sa.numel() / sa.last();
  const int p = sa.last(), ncol = sb.dim(1);
  Shape out_shape = sa.rank() == 2 ? Shape{static_cast<int>(rows), ncol}
                                   : Shape{sa.dim(0), sa.dim(1), ncol};

  std::vector<double> out(static_cast<size_t>(rows) * ncol, 0.0);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::int64_t i = 0; i < rows; ++i)
    for (int t = 0; t < p; ++t) {
      const double av_it = av[static_cast<size_t>(i * p + t)];
      if (av_it == 0.0) continue;
      const size_t bo = static_cast<size_t>(t) * ncol;
      const size_t co = static_cast<size_t>(i) * ncol;
      for (int j = 0; j < ncol; ++j) out[co + j] += av_it * bv[bo + j];
    }

  bool rg = needs_grad(a) || needs_grad(b);
  Tensor res = emit(out_shape, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), pb = b.node_id(), po = res.node_id();
  nodes_.back().back = [pa, pb, po, rows, p, ncol](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& av = tp.val_buf(pa);
    const auto& bv = tp.val_buf(pb);
    if (tp.nodes_[static_cast<size_t>(pa)].requires_grad) {
      auto& da = tp.grad_buf(pa);
      for (std::int64_t i = 0; i < rows; ++i)
        for (int t = 0; t < p; ++t) {
          double acc = 0.0;
          const size_t go = static_cast<size_t>(i) * ncol;
          const size_t bo = static_cast<size_t>(t) * ncol;
          for (int j = 0; j < ncol; ++j) acc += g[go + j] * bv[bo + j];
          da[static_cast<size_t>(i * p + t)] += acc;
        }
    }
    if (tp.nodes_[static_cast<size_t>(pb)].requires_grad) {
      auto& db = tp.grad_buf(pb);
      for (std::int64_t i = 0; i < rows; ++i)
        for (int t = 0; t < p; ++t) {
          const double av_it = av[static_cast<size_t>(i * p + t)];
          if (av_it == 0.0) continue;
          const size_t go = static_cast<size_t>(i) * ncol;
          const size_t bo = static_cast<size_t>(t) * ncol;
          for (int j = 0; j < ncol; ++j) db[bo + j] += av_it * g[go + j];
        }
    }
  };
  return res;
}

Tensor Tape::add(Tensor a, Tensor b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  const bool bias = sb.rank() == 1;
  if (!bias && sa != sb)
    throw std::invalid_argument("add: shape mismatch " + sa.str() + " vs " + sb.str());
  if (bias && sa.last() != sb.dim(0))
    throw std::invalid_argument("add: bias width " + sb.str() + " vs " + sa.str());

  const auto av = a.values();
  const auto bv = b.values();
  const int d = sa.last();  // capture before emit(): nodes_ may reallocate
  std::vector<double> out(av.begin(), av.end());
  if (bias) {
    const std::int64_t rows = sa.numel() / d;
    for (std::int64_t r = 0; r < rows; ++r)
      for (int j = 0; j < d; ++j) out[static_cast<size_t>(r * d + j)] += bv[static_cast<size_t>(j)];
  } else {
    for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  }

  bool rg = needs_grad(a) || needs_grad(b);
  Tensor res = emit(sa, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), pb = b.node_id(), po = res.node_id();
  nodes_.back().back = [pa, pb, po, bias, d](Tape& tp) {
    const auto& g = tp.val_grad(po);
    if (tp.nodes_[static_cast<size_t>(pa)].requires_grad) {
      auto& da = tp.grad_buf(pa);
      for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
    }
    if (tp.nodes_[static_cast<size_t>(pb)].requires_grad) {
      auto& db = tp.grad_buf(pb);
      if (bias) {
        const std::int64_t rows = static_cast<std::int64_t>(g.size()) / d;
        for (std::int64_t r = 0; r < rows; ++r)
          for (int j = 0; j < d; ++j) db[static_cast<size_t>(j)] += g[static_cast<size_t>(r * d + j)];
      } else {
        for (size_t i = 0; i < g.size(); ++i) db[i] += g[i];
      }
    }
  };
  return res;
}

Tensor Tape::sub(Tensor a, Tensor b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument("sub: shape mismatch " + a.shape().str() + " vs " +
                                b.shape().str());
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  bool rg = needs_grad(a) || needs_grad(b);
  Tensor res = emit(a.shape(), std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), pb = b.node_id(), po = res.node_id();
  nodes_.back().back = [pa, pb, po](Tape& tp) {
    const auto& g = tp.val_grad(po);
    if (tp.nodes_[static_cast<size_t>(pa)].requires_grad) {
      auto& da = tp.grad_buf(pa);
      for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
    }
    if (tp.nodes_[static_cast<size_t>(pb)].requires_grad) {
      auto& db = tp.grad_buf(pb);
      for (size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
    }
  };
  return res;
}

Tensor Tape::mul(Tensor a, Tensor b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument("mul: shape mismatch " + a.shape().str() + " vs " +
                                b.shape().str());
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  bool rg = needs_grad(a) || needs_grad(b);
  Tensor res = emit(a.shape(), std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), pb = b.node_id(), po = res.node_id();
  nodes_.back().back = [pa, pb, po](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& av = tp.val_buf(pa);
    const auto& bv = tp.val_buf(pb);
    if (tp.nodes_[static_cast<size_t>(pa)].requires_grad) {
      auto& da = tp.grad_buf(pa);
      for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv[i];
    }
    if (tp.nodes_[static_cast<size_t>(pb)].requires_grad) {
      auto& db = tp.grad_buf(pb);
      for (size_t i = 0; i < g.size(); ++i) db[i] += g[i] * av[i];
    }
  };
  return res;
}

Tensor Tape::scale(Tensor a, double c) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * c;
  bool rg = needs_grad(a);
  Tensor res = emit(a.shape(), std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, c](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * c;
  };
  return res;
}

Tensor Tape::concat_last(Tensor a, Tensor b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.rank() != sb.rank()) throw std::invalid_argument("concat_last: rank mismatch");
  for (int i = 0; i + 1 < sa.rank(); ++i)
    if (sa.dim(i) != sb.dim(i)) throw std::invalid_argument("concat_last: leading dim mismatch");
  const int da = sa.last(), db = sb.last();
  const std::int64_t rows = sa.numel() / da;
  Shape out_shape = sa.rank() == 2 ? Shape{sa.dim(0), da + db}
                  : sa.rank() == 3 ? Shape{sa.dim(0), sa.dim(1), da + db}
                                   : Shape{da + db};

  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(static_cast<size_t>(rows) * (da + db));
  for (std::int64_t r = 0; r < rows; ++r) {
    std::copy_n(av.begin() + r * da, da, out.begin() + r * (da + db));
    std::copy_n(bv.begin() + r * db, db, out.begin() + r * (da + db) + da);
  }
  bool rg = needs_grad(a) || needs_grad(b);
  Tensor res = emit(out_shape, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), pb = b.node_id(), po = res.node_id();
  nodes_.back().back = [pa, pb, po, rows, da, db](Tape& tp) {
    const auto& g = tp.val_grad(po);
    if (tp.nodes_[static_cast<size_t>(pa)].requires_grad) {
      auto& ga = tp.grad_buf(pa);
      for (std::int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < da; ++j)
          ga[static_cast<size_t>(r * da + j)] += g[static_cast<size_t>(r * (da + db) + j)];
    }
    if (tp.nodes_[static_cast<size_t>(pb)].requires_grad) {
      auto& gb = tp.grad_buf(pb);
      for (std::int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < db; ++j)
          gb[static_cast<size_t>(r * db + j)] += g[static_cast<size_t>(r * (da + db) + da + j)];
    }
  };
  return res;
}

Tensor Tape::concat_rows(Tensor a, Tensor b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.rank() != 2 || sb.rank() != 2 || sa.dim(1) != sb.dim(1))
    throw std::invalid_argument("concat_rows: need rank-2 with equal width");
  const int d = sa.dim(1);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out;
  out.reserve(av.size() + bv.size());
  out.insert(out.end(), av.begin(), av.end());
  out.insert(out.end(), bv.begin(), bv.end());
  bool rg = needs_grad(a) || needs_grad(b);
  Tensor res = emit(Shape{sa.dim(0) + sb.dim(0), d}, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), pb = b.node_id(), po = res.node_id();
  const size_t na = av.size();
  nodes_.back().back = [pa, pb, po, na](Tape& tp) {
    const auto& g = tp.val_grad(po);
    if (tp.nodes_[static_cast<size_t>(pa)].requires_grad) {
      auto& ga = tp.grad_buf(pa);
      for (size_t i = 0; i < na; ++i) ga[i] += g[i];
    }
    if (tp.nodes_[static_cast<size_t>(pb)].requires_grad) {
      auto& gb = tp.grad_buf(pb);
      for (size_t i = na; i < g.size(); ++i) gb[i - na] += g[i];
    }
  };
  return res;
}

namespace {
enum class Unary { Relu, LeakyRelu, Sigmoid, Tanh, Abs, Sqrt };
}

Tensor Tape::relu(Tensor a) { return leaky_relu(a, 0.0); }

Tensor Tape::leaky_relu(Tensor a, double slope) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : slope * av[i];
  bool rg = needs_grad(a);
  Tensor res = emit(a.shape(), std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, slope](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& av = tp.val_buf(pa);
    auto& da = tp.grad_buf(pa);
    for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (av[i] > 0.0 ? 1.0 : slope);
  };
  return res;
}

Tensor Tape::sigmoid(Tensor a) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-av[i]));
  bool rg = needs_grad(a);
  Tensor res = emit(a.shape(), std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& s = tp.val_buf(po);
    auto& da = tp.grad_buf(pa);
    for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * s[i] * (1.0 - s[i]);
  };
  return res;
}

Tensor Tape::tanh(Tensor a) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
  bool rg = needs_grad(a);
  Tensor res = emit(a.shape(), std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& t = tp.val_buf(po);
    auto& da = tp.grad_buf(pa);
    for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - t[i] * t[i]);
  };
  return res;
}

Tensor Tape::abs(Tensor a) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(av[i]);
  bool rg = needs_grad(a);
  Tensor res = emit(a.shape(), std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& av = tp.val_buf(pa);
    auto& da = tp.grad_buf(pa);
    // sign-routing subgradient: 0 at exact zero
    for (size_t i = 0; i < g.size(); ++i)
      da[i] += g[i] * (av[i] > 0.0 ? 1.0 : av[i] < 0.0 ? -1.0 : 0.0);
  };
  return res;
}

Tensor Tape::sqrt(Tensor a) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(av[i]);
  bool rg = needs_grad(a);
  Tensor res = emit(a.shape(), std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& s = tp.val_buf(po);
    auto& da = tp.grad_buf(pa);
    for (size_t i = 0; i < g.size(); ++i) da[i] += s[i] > 0.0 ? g[i] * 0.5 / s[i] : 0.0;
  };
  return res;
}

Tensor Tape::max_over_axis(Tensor a, int axis) {
  const Shape& s = a.shape();
  Shape os = reduced_shape(s, axis);
  AxisView v = axis_view(s, axis);
  const auto av = a.values();
  std::vector<double> out(static_cast<size_t>(v.outer * v.inner));
  std::vector<int> arg(out.size());
  for (std::int64_t o = 0; o < v.outer; ++o)
    for (std::int64_t i = 0; i < v.inner; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      int bt = 0;
      for (std::int64_t t = 0; t < v.red; ++t) {
        double x = av[static_cast<size_t>((o * v.red + t) * v.inner + i)];
        if (x > best) {  // strict > breaks ties toward the smallest index
          best = x;
          bt = static_cast<int>(t);
        }
      }
      out[static_cast<size_t>(o * v.inner + i)] = best;
      arg[static_cast<size_t>(o * v.inner + i)] = bt;
    }
  bool rg = needs_grad(a);
  Tensor res = emit(os, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, v, arg = std::move(arg)](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (std::int64_t o = 0; o < v.outer; ++o)
      for (std::int64_t i = 0; i < v.inner; ++i) {
        const size_t oi = static_cast<size_t>(o * v.inner + i);
        da[static_cast<size_t>((o * v.red + arg[oi]) * v.inner + i)] += g[oi];
      }
  };
  return res;
}

Tensor Tape::mean_over_axis(Tensor a, int axis) {
  return scale(sum_over_axis(a, axis), 1.0 / a.shape().dim(axis));
}

Tensor Tape::sum_over_axis(Tensor a, int axis) {
  const Shape& s = a.shape();
  Shape os = reduced_shape(s, axis);
  AxisView v = axis_view(s, axis);
  const auto av = a.values();
  std::vector<double> out(static_cast<size_t>(v.outer * v.inner), 0.0);
  for (std::int64_t o = 0; o < v.outer; ++o)
    for (std::int64_t t = 0; t < v.red; ++t)
      for (std::int64_t i = 0; i < v.inner; ++i)
        out[static_cast<size_t>(o * v.inner + i)] +=
            av[static_cast<size_t>((o * v.red + t) * v.inner + i)];
  bool rg = needs_grad(a);
  Tensor res = emit(os, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, v](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (std::int64_t o = 0; o < v.outer; ++o)
      for (std::int64_t t = 0; t < v.red; ++t)
        for (std::int64_t i = 0; i < v.inner; ++i)
          da[static_cast<size_t>((o * v.red + t) * v.inner + i)] +=
              g[static_cast<size_t>(o * v.inner + i)];
  };
  return res;
}

Tensor Tape::softmax(Tensor a) {
  const Shape& s = a.shape();
  if (s.rank() != 2) throw std::invalid_argument("softmax: rank-2 expected, got " + s.str());
  const int n = s.dim(0), d = s.dim(1);
  if (d < 1) throw std::invalid_argument("softmax: empty axis");
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (int r = 0; r < n; ++r) {
    const size_t ro = static_cast<size_t>(r) * d;
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j) mx = std::max(mx, av[ro + j]);
    double z = 0.0;
    for (int j = 0; j < d; ++j) {
      out[ro + j] = std::exp(av[ro + j] - mx);
      z += out[ro + j];
    }
    for (int j = 0; j < d; ++j) out[ro + j] /= z;
  }
  bool rg = needs_grad(a);
  Tensor res = emit(s, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, n, d](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& sm = tp.val_buf(po);
    auto& da = tp.grad_buf(pa);
    for (int r = 0; r < n; ++r) {
      const size_t ro = static_cast<size_t>(r) * d;
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += g[ro + j] * sm[ro + j];
      for (int j = 0; j < d; ++j) da[ro + j] += sm[ro + j] * (g[ro + j] - dot);
    }
  };
  return res;
}

namespace {

// Radial squash helpers: h(r) = tanh(r)/r and q(r) = h'(r)/r, with series
// fallbacks so rows near the origin stay smooth.
double radial_gain(double r) {
  if (r < 1e-6) return 1.0 - r * r / 3.0;
  return std::tanh(r) / r;
}

double radial_gain_slope(double r) {
  if (r < 1e-6) return -2.0 / 3.0;
  const double t = std::tanh(r);
  const double sech2 = 1.0 - t * t;
  return (r * sech2 - t) / (r * r * r);
}

}  // namespace

Tensor Tape::radial_cap(Tensor a, double radius) {
  const Shape& s = a.shape();
  if (s.rank() != 2) throw std::invalid_argument("radial_cap: rank-2 expected, got " + s.str());
  const int n = s.dim(0), d = s.dim(1);
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (int r = 0; r < n; ++r) {
    const size_t ro = static_cast<size_t>(r) * d;
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) r2 += av[ro + j] * av[ro + j];
    const double gain = radius * radial_gain(std::sqrt(r2));
    for (int j = 0; j < d; ++j) out[ro + j] = gain * av[ro + j];
  }
  bool rg = needs_grad(a);
  Tensor res = emit(s, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, n, d, radius](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& v = tp.val_buf(pa);
    auto& da = tp.grad_buf(pa);
    for (int r = 0; r < n; ++r) {
      const size_t ro = static_cast<size_t>(r) * d;
      double r2 = 0.0, vdot = 0.0;
      for (int j = 0; j < d; ++j) {
        r2 += v[ro + j] * v[ro + j];
        vdot += g[ro + j] * v[ro + j];
      }
      const double rn = std::sqrt(r2);
      const double h = radial_gain(rn), q = radial_gain_slope(rn);
      for (int j = 0; j < d; ++j) da[ro + j] += radius * (h * g[ro + j] + q * vdot * v[ro + j]);
    }
  };
  return res;
}

Tensor Tape::layer_norm(Tensor a, Tensor gain, Tensor bias) {
  const Shape& s = a.shape();
  if (s.rank() != 2) throw std::invalid_argument("layer_norm: rank-2 expected");
  const int n = s.dim(0), d = s.dim(1);
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d})
    throw std::invalid_argument("layer_norm: gain/bias must be rank-1 of width " +
                                std::to_string(d));
  const auto av = a.values();
  const auto gv = gain.values();
  const auto bv = bias.values();
  std::vector<double> out(av.size());
  std::vector<double> xhat(av.size());
  std::vector<double> inv_std(static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    const size_t ro = static_cast<size_t>(r) * d;
    double mu = 0.0;
    for (int j = 0; j < d; ++j) mu += av[ro + j];
    mu /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      double c = av[ro + j] - mu;
      var += c * c;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std[static_cast<size_t>(r)] = is;
    for (int j = 0; j < d; ++j) {
      xhat[ro + j] = (av[ro + j] - mu) * is;
      out[ro + j] = gv[static_cast<size_t>(j)] * xhat[ro + j] + bv[static_cast<size_t>(j)];
    }
  }
  bool rg = needs_grad(a) || needs_grad(gain) || needs_grad(bias);
  Tensor res = emit(s, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), pg = gain.node_id(), pb = bias.node_id(), po = res.node_id();
  nodes_.back().back = [pa, pg, pb, po, n, d, xhat = std::move(xhat),
                        inv_std = std::move(inv_std)](Tape& tp) {
    const auto& g = tp.val_grad(po);
    const auto& gv = tp.val_buf(pg);
    const bool need_a = tp.nodes_[static_cast<size_t>(pa)].requires_grad;
    const bool need_g = tp.nodes_[static_cast<size_t>(pg)].requires_grad;
    const bool need_b = tp.nodes_[static_cast<size_t>(pb)].requires_grad;
    for (int r = 0; r < n; ++r) {
      const size_t ro = static_cast<size_t>(r) * d;
      if (need_g) {
        auto& dg = tp.grad_buf(pg);
        for (int j = 0; j < d; ++j) dg[static_cast<size_t>(j)] += g[ro + j] * xhat[ro + j];
      }
      if (need_b) {
        auto& db = tp.grad_buf(pb);
        for (int j = 0; j < d; ++j) db[static_cast<size_t>(j)] += g[ro + j];
      }
      if (need_a) {
        auto& da = tp.grad_buf(pa);
        double m1 = 0.0, m2 = 0.0;
        for (int j = 0; j < d; ++j) {
          const double gg = g[ro + j] * gv[static_cast<size_t>(j)];
          m1 += gg;
          m2 += gg * xhat[ro + j];
        }
        m1 /= d;
        m2 /= d;
        const double is = inv_std[static_cast<size_t>(r)];
        for (int j = 0; j < d; ++j) {
          const double gg = g[ro + j] * gv[static_cast<size_t>(j)];
          da[ro + j] += is * (gg - m1 - xhat[ro + j] * m2);
        }
      }
    }
  };
  return res;
}

Tensor Tape::gather_rows(Tensor a, const std::vector<int>& ids) {
  const Shape& s = a.shape();
  if (s.rank() != 2) throw std::invalid_argument("gather_rows: rank-2 expected");
  const int d = s.dim(1);
  const auto av = a.values();
  std::vector<double> out(ids.size() * static_cast<size_t>(d));
  for (size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= s.dim(0)) throw std::invalid_argument("gather_rows: index range");
    std::copy_n(av.begin() + static_cast<std::int64_t>(ids[r]) * d, d,
                out.begin() + static_cast<std::int64_t>(r) * d);
  }
  bool rg = needs_grad(a);
  Tensor res = emit(Shape{static_cast<int>(ids.size()), d}, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, d, ids](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (size_t r = 0; r < ids.size(); ++r)
      for (int j = 0; j < d; ++j)
        da[static_cast<size_t>(ids[r]) * d + static_cast<size_t>(j)] +=
            g[r * static_cast<size_t>(d) + static_cast<size_t>(j)];
  };
  return res;
}

Tensor Tape::gather_neighbors(Tensor a, const std::vector<int>& ids, int k) {
  const Shape& s = a.shape();
  if (s.rank() != 2) throw std::invalid_argument("gather_neighbors: rank-2 expected");
  if (k < 1 || ids.size() % static_cast<size_t>(k) != 0)
    throw std::invalid_argument("gather_neighbors: ids not divisible by k");
  const int m = static_cast<int>(ids.size()) / k;
  const int d = s.dim(1);  // capture before gather_rows(): nodes_ may reallocate
  Tensor flat = gather_rows(a, ids);
  return reshape(flat, Shape{m, k, d});
}

Tensor Tape::gather_mid(Tensor a, const std::vector<int>& pos, int m) {
  const Shape& s = a.shape();
  if (s.rank() != 3) throw std::invalid_argument("gather_mid: rank-3 expected");
  const int q = s.dim(0), k = s.dim(1), d = s.dim(2);
  if (static_cast<int>(pos.size()) != q * m) throw std::invalid_argument("gather_mid: pos size");
  const auto av = a.values();
  std::vector<double> out(static_cast<size_t>(q) * m * d);
  for (int r = 0; r < q; ++r)
    for (int j = 0; j < m; ++j) {
      const int p = pos[static_cast<size_t>(r) * m + j];
      if (p < 0 || p >= k) throw std::invalid_argument("gather_mid: position range");
      std::copy_n(av.begin() + (static_cast<std::int64_t>(r) * k + p) * d, d,
                  out.begin() + (static_cast<std::int64_t>(r) * m + j) * d);
    }
  bool rg = needs_grad(a);
  Tensor res = emit(Shape{q, m, d}, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, q, k, d, m, pos](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (int r = 0; r < q; ++r)
      for (int j = 0; j < m; ++j) {
        const int p = pos[static_cast<size_t>(r) * m + j];
        for (int t = 0; t < d; ++t)
          da[(static_cast<size_t>(r) * k + static_cast<size_t>(p)) * d + static_cast<size_t>(t)] +=
              g[(static_cast<size_t>(r) * m + static_cast<size_t>(j)) * d + static_cast<size_t>(t)];
      }
  };
  return res;
}

Tensor Tape::broadcast_mid(Tensor a, int k) {
  const Shape& s = a.shape();
  if (s.rank() != 2) throw std::invalid_argument("broadcast_mid: rank-2 expected");
  const int m = s.dim(0), d = s.dim(1);
  const auto av = a.values();
  std::vector<double> out(static_cast<size_t>(m) * k * d);
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < k; ++j)
      std::copy_n(av.begin() + static_cast<std::int64_t>(r) * d, d,
                  out.begin() + (static_cast<std::int64_t>(r) * k + j) * d);
  bool rg = needs_grad(a);
  Tensor res = emit(Shape{m, k, d}, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, m, k, d](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (int r = 0; r < m; ++r)
      for (int j = 0; j < k; ++j)
        for (int t = 0; t < d; ++t)
          da[static_cast<size_t>(r) * d + static_cast<size_t>(t)] +=
              g[(static_cast<size_t>(r) * k + static_cast<size_t>(j)) * d + static_cast<size_t>(t)];
  };
  return res;
}

Tensor Tape::repeat_rows(Tensor a, int m) {
  const Shape& s = a.shape();
  if (s.rank() != 2 || s.dim(0) != 1) throw std::invalid_argument("repeat_rows: (1,d) expected");
  const int d = s.dim(1);
  const auto av = a.values();
  std::vector<double> out(static_cast<size_t>(m) * d);
  for (int r = 0; r < m; ++r) std::copy_n(av.begin(), d, out.begin() + static_cast<std::int64_t>(r) * d);
  bool rg = needs_grad(a);
  Tensor res = emit(Shape{m, d}, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, m, d](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (int r = 0; r < m; ++r)
      for (int j = 0; j < d; ++j)
        da[static_cast<size_t>(j)] += g[static_cast<size_t>(r) * d + static_cast<size_t>(j)];
  };
  return res;
}

Tensor Tape::transpose(Tensor a) {
  const Shape& s = a.shape();
  if (s.rank() != 2) throw std::invalid_argument("transpose: rank-2 expected");
  const int m = s.dim(0), n = s.dim(1);
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<size_t>(j) * m + static_cast<size_t>(i)] =
          av[static_cast<size_t>(i) * n + static_cast<size_t>(j)];
  bool rg = needs_grad(a);
  Tensor res = emit(Shape{n, m}, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po, m, n](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        da[static_cast<size_t>(i) * n + static_cast<size_t>(j)] +=
            g[static_cast<size_t>(j) * m + static_cast<size_t>(i)];
  };
  return res;
}

Tensor Tape::reshape(Tensor a, const Shape& shape) {
  if (shape.numel() != a.numel())
    throw std::invalid_argument("reshape: numel mismatch " + a.shape().str() + " -> " +
                                shape.str());
  const auto av = a.values();
  std::vector<double> out(av.begin(), av.end());
  bool rg = needs_grad(a);
  Tensor res = emit(shape, std::move(out), rg, nullptr);
  if (!rg) return res;
  int pa = a.node_id(), po = res.node_id();
  nodes_.back().back = [pa, po](Tape& tp) {
    const auto& g = tp.val_grad(po);
    auto& da = tp.grad_buf(pa);
    for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
  };
  return res;
}

}  // namespace relc
