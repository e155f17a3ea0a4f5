// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode automatic differentiation over dense double matrices.
// A Tape records one forward pass; backward() walks the recorded nodes once,
// in reverse creation order (which is a reverse topological order because
// every op's parents are created before it). Tensors are cheap handles into
// the tape. Rank is at most 3; shapes are explicit and ops never broadcast
// implicitly except for the documented rank-1 bias add.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace relc {

class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<int> dims);
  explicit Shape(const std::vector<int>& dims);

  int rank() const { return rank_; }
  int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  int last() const { return dims_[static_cast<size_t>(rank_ - 1)]; }
  std::int64_t numel() const;
  bool operator==(const Shape& o) const;
  bool operator!=(const Shape& o) const { return !(*this == o); }
  std::string str() const;

 private:
  std::array<int, 3> dims_{1, 1, 1};
  int rank_ = 0;
};

class Tape;

/// Handle to a node on a Tape. Valid as long as the tape lives.
class Tensor {
 public:
  Tensor() = default;
  bool valid() const { return tape_ != nullptr; }
  const Shape& shape() const;
  std::int64_t numel() const { return shape().numel(); }
  std::span<const double> values() const;
  /// Gradient of the last backward() w.r.t. this tensor (empty if untouched).
  std::span<const double> grad() const;
  double item() const;  // requires numel() == 1
  double at(std::int64_t i) const;
  int node_id() const { return node_; }

 private:
  friend class Tape;
  Tensor(Tape* t, int n) : tape_(t), node_(n) {}
  Tape* tape_ = nullptr;
  int node_ = -1;
};

/// One forward pass worth of recorded operations. Single-threaded by design;
/// run independent tapes on independent threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(const Shape& shape, std::vector<double> values, bool requires_grad);
  Tensor constant(const Shape& shape, std::vector<double> values);
  Tensor constant_scalar(double v);

  // -- core differentiable ops ------------------------------------------
  Tensor matmul(Tensor a, Tensor b);          // (m,p)x(p,n) or (m,k,p)x(p,n)
  Tensor add(Tensor a, Tensor b);             // same shape, or b rank-1 bias over last axis
  Tensor sub(Tensor a, Tensor b);             // same shape
  Tensor mul(Tensor a, Tensor b);             // elementwise, same shape
  Tensor scale(Tensor a, double c);
  Tensor concat_last(Tensor a, Tensor b);     // along the last axis
  Tensor concat_rows(Tensor a, Tensor b);     // along axis 0, rank 2
  Tensor relu(Tensor a);
  Tensor leaky_relu(Tensor a, double slope);
  Tensor sigmoid(Tensor a);
  Tensor tanh(Tensor a);
  Tensor abs(Tensor a);                       // subgradient 0 at exact zero
  Tensor sqrt(Tensor a);                      // subgradient 0 at exact zero
  Tensor radial_cap(Tensor a, double radius);  // rank 2; row v -> radius*tanh(|v|)/|v| * v
  Tensor max_over_axis(Tensor a, int axis);   // argmax routing, ties to smallest index
  Tensor mean_over_axis(Tensor a, int axis);
  Tensor sum_over_axis(Tensor a, int axis);
  Tensor softmax(Tensor a);                   // last axis, rank 2
  Tensor layer_norm(Tensor a, Tensor gain, Tensor bias);  // last axis, rank 2
  Tensor gather_rows(Tensor a, const std::vector<int>& ids);            // (n,d) -> (|ids|,d)
  Tensor gather_neighbors(Tensor a, const std::vector<int>& ids, int k);  // (n,d) -> (m,k,d)
  Tensor gather_mid(Tensor a, const std::vector<int>& pos, int m);      // (q,k,d) -> (q,m,d)
  Tensor broadcast_mid(Tensor a, int k);      // (m,d) -> (m,k,d)
  Tensor repeat_rows(Tensor a, int m);        // (1,d) -> (m,d)
  Tensor transpose(Tensor a);                 // rank 2
  Tensor reshape(Tensor a, const Shape& shape);

  /// Seeds d(loss)/d(loss) = 1 and accumulates adjoints into every node
  /// reachable backwards from `loss`. The loss must be a single element.
  void backward(Tensor loss);

  size_t size() const { return nodes_.size(); }
  const Shape& shape_of(int node) const { return nodes_[static_cast<size_t>(node)].shape; }
  std::span<const double> values_of(int node) const;
  std::span<const double> grad_of(int node) const;

 private:
  struct Node {
    Shape shape;
    std::vector<double> v;
    std::vector<double> g;  // lazily sized by backward()
    bool requires_grad = false;
    std::function<void(Tape&)> back;  // accumulates into parents' g
  };

  friend class Tensor;
  Tensor emit(const Shape& shape, std::vector<double> values, bool requires_grad,
              std::function<void(Tape&)> back);
  std::vector<double>& grad_buf(int node);
  const std::vector<double>& val_buf(int node) const {
    return nodes_[static_cast<size_t>(node)].v;
  }
  const std::vector<double>& val_grad(int node) const {
    return nodes_[static_cast<size_t>(node)].g;
  }
  bool needs_grad(Tensor t) const { return nodes_[static_cast<size_t>(t.node_)].requires_grad; }

  std::vector<Node> nodes_;
};

}  // namespace relc
