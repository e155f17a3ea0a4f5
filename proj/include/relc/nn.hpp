// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Named parameter storage, MLP building blocks, and the AdamW optimizer.
// Parameters live in a ParamStore (values + Adam moments, keyed by name, in
// a stable registration order). A ParamContext binds store entries onto a
// Tape as leaf tensors for one forward/backward pass and collects the
// resulting gradients back out, keyed by name.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "relc/rng.hpp"
#include "relc/tensor.hpp"

namespace relc {

struct ParamTensor {
  Shape shape;
  std::vector<double> value;
  std::vector<double> m;  // Adam first moment
  std::vector<double> v;  // Adam second moment
};

class ParamStore {
 public:
  void add(const std::string& name, const Shape& shape, std::vector<double> values);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  ParamTensor& at(const std::string& name);
  const ParamTensor& at(const std::string& name) const;
  /// Names in registration order (the checkpoint and update order).
  const std::vector<std::string>& names() const { return order_; }
  std::int64_t scalar_count() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, ParamTensor> params_;
};

/// Gradients keyed by parameter name, accumulated across batch items.
using GradMap = std::map<std::string, std::vector<double>>;

class ParamContext {
 public:
  /// trainable=false binds parameters as constants (inference / frozen eval).
  ParamContext(Tape& tape, const ParamStore& store, bool trainable = true)
      : tape_(&tape), store_(&store), trainable_(trainable) {}

  /// Returns the tape tensor for a named parameter, binding it on first use.
  Tensor operator()(const std::string& name);

  /// Pre-binds an existing tape tensor as the named parameter (finite
  /// difference harnesses substitute perturbed leaves this way). Must happen
  /// before the first use of the name; shapes must agree.
  void bind(const std::string& name, Tensor t);

  /// Adds d(loss)/d(param) for every bound parameter into `out` (elementwise).
  void add_grads(GradMap& out) const;

 private:
  Tape* tape_;
  const ParamStore* store_;
  bool trainable_;
  std::map<std::string, Tensor> bound_;
};

enum class Act { None, Relu, LeakyRelu, Sigmoid, Tanh };

/// Layer widths dims = {in, h1, ..., out}; `hidden` applies between layers,
/// `final_act` after the last one.
struct MlpSpec {
  std::vector<int> dims;
  Act hidden = Act::LeakyRelu;
  Act final_act = Act::None;
  double leaky_slope = 0.2;
  bool zero_init_final = false;  // residual-friendly: last layer starts at 0
};

/// Registers weights `<prefix>.w<i>` / biases `<prefix>.b<i>`. Weights use
/// uniform Kaiming-style fan-in scaling (bound sqrt(6/fan_in)); biases zero.
void register_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng);

/// Runs the MLP on x (rank 2 or 3; last axis = dims.front()).
Tensor mlp_forward(Tape& tape, ParamContext& ctx, const std::string& prefix, const MlpSpec& spec,
                   Tensor x);

Tensor apply_act(Tape& tape, Tensor x, Act act, double leaky_slope);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// One decoupled-weight-decay Adam update over every parameter in the store.
/// `step` is 1-based (moments are zero before the first call). Parameters
/// absent from `grads` receive zero gradient. Throws DivergedError on any
/// non-finite gradient or updated value.
void adamw_step(ParamStore& store, const GradMap& grads, const AdamConfig& cfg, std::int64_t step);

}  // namespace relc
