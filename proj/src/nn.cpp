// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "relc/error.hpp"

namespace relc {

void ParamStore::add(const std::string& name, const Shape& shape, std::vector<double> values) {
  if (contains(name)) throw std::invalid_argument("param already registered: " + name);
  if (static_cast<std::int64_t>(values.size()) != shape.numel())
    throw std::invalid_argument("param size mismatch: " + name);
  ParamTensor p;
  p.shape = shape;
  p.value = std::move(values);
  p.m.assign(p.value.size(), 0.0);
  p.v.assign(p.value.size(), 0.0);
  order_.push_back(name);
  params_.emplace(name, std::move(p));
}

ParamTensor& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("unknown param: " + name);
  return it->second;
}

const ParamTensor& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("unknown param: " + name);
  return it->second;
}

std::int64_t ParamStore::scalar_count() const {
  std::int64_t n = 0;
  for (const auto& name : order_) n += params_.at(name).shape.numel();
  return n;
}

Tensor ParamContext::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  const ParamTensor& p = store_->at(name);
  Tensor t = tape_->leaf(p.shape, p.value, trainable_);
  bound_.emplace(name, t);
  return t;
}

void ParamContext::bind(const std::string& name, Tensor t) {
  if (bound_.count(name)) throw std::invalid_argument("param already bound: " + name);
  if (!(t.shape() == store_->at(name).shape))
    throw std::invalid_argument("bind: shape mismatch for " + name);
  bound_.emplace(name, t);
}

void ParamContext::add_grads(GradMap& out) const {
  for (const auto& [name, tensor] : bound_) {
    auto g = tensor.grad();
    if (g.empty()) continue;  // parameter never reached by backward
    auto& acc = out[name];
    if (acc.empty()) acc.assign(g.size(), 0.0);
    for (size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
  }
}

Tensor apply_act(Tape& tape, Tensor x, Act act, double leaky_slope) {
  switch (act) {
    case Act::None: return x;
    case Act::Relu: return tape.relu(x);
    case Act::LeakyRelu: return tape.leaky_relu(x, leaky_slope);
    case Act::Sigmoid: return tape.sigmoid(x);
    case Act::Tanh: return tape.tanh(x);
  }
  throw std::invalid_argument("unknown activation");
}

void register_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng) {
  if (spec.dims.size() < 2) throw std::invalid_argument("mlp needs at least one layer: " + prefix);
  for (size_t l = 0; l + 1 < spec.dims.size(); ++l) {
    const int in = spec.dims[l], out = spec.dims[l + 1];
    if (in <= 0 || out <= 0) throw std::invalid_argument("mlp dims must be positive: " + prefix);
    const bool zero = spec.zero_init_final && l + 2 == spec.dims.size();
    std::vector<double> w(static_cast<size_t>(in) * out, 0.0);
    if (!zero) {
      const double bound = std::sqrt(6.0 / in);
      for (auto& x : w) x = uniform(rng, -bound, bound);
    }
    const std::string idx = std::to_string(l);
    store.add(prefix + ".w" + idx, Shape{in, out}, std::move(w));
    store.add(prefix + ".b" + idx, Shape{out}, std::vector<double>(static_cast<size_t>(out), 0.0));
  }
}

Tensor mlp_forward(Tape& tape, ParamContext& ctx, const std::string& prefix, const MlpSpec& spec,
                   Tensor x) {
  if (x.shape().last() != spec.dims.front())
    throw std::invalid_argument("mlp input width " + std::to_string(x.shape().last()) +
                                " != " + std::to_string(spec.dims.front()) + " for " + prefix);
  Tensor h = x;
  for (size_t l = 0; l + 1 < spec.dims.size(); ++l) {
    const std::string idx = std::to_string(l);
    h = tape.add(tape.matmul(h, ctx(prefix + ".w" + idx)), ctx(prefix + ".b" + idx));
    const bool last = l + 2 == spec.dims.size();
    h = apply_act(tape, h, last ? spec.final_act : spec.hidden, spec.leaky_slope);
  }
  return h;
}

void adamw_step(ParamStore& store, const GradMap& grads, const AdamConfig& cfg,
                std::int64_t step) {
  if (step < 1) throw std::invalid_argument("adamw_step: step is 1-based");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  static const std::vector<double> kEmpty;
  for (const auto& name : store.names()) {
    ParamTensor& p = store.at(name);
    auto it = grads.find(name);
    const std::vector<double>& g = it == grads.end() ? kEmpty : it->second;
    if (!g.empty() && g.size() != p.value.size())
      throw std::invalid_argument("gradient size mismatch for " + name);
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      if (!std::isfinite(gi)) throw DivergedError("non-finite gradient in " + name);
      p.m[i] = cfg.beta1 * p.m[i] + (1.0 - cfg.beta1) * gi;
      p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = p.m[i] / bc1;
      const double vhat = p.v[i] / bc2;
      p.value[i] -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p.value[i]);
      if (!std::isfinite(p.value[i])) throw DivergedError("non-finite parameter in " + name);
    }
  }
}

}  // namespace relc
