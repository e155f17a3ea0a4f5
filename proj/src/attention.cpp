// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace relc {

namespace {

void check_heads(int dim, int heads) {
  if (heads < 1 || dim % heads != 0)
    throw std::invalid_argument("attention: dim " + std::to_string(dim) +
                                " not divisible by heads " + std::to_string(heads));
}

void register_norm(ParamStore& store, const std::string& prefix, int dim) {
  store.add(prefix + ".gain", Shape{dim}, std::vector<double>(static_cast<size_t>(dim), 1.0));
  store.add(prefix + ".bias", Shape{dim}, std::vector<double>(static_cast<size_t>(dim), 0.0));
}

std::vector<double> kaiming(int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  std::vector<double> w(static_cast<size_t>(fan_in) * fan_out);
  for (auto& x : w) x = uniform(rng, -bound, bound);
  return w;
}

Tensor norm(Tape& tape, ParamContext& ctx, const std::string& prefix, Tensor x) {
  return tape.layer_norm(x, ctx(prefix + ".gain"), ctx(prefix + ".bias"));
}

/// Shared core: queries (n, dim) against keys/values (m, dim), both already
/// layer-normed; adds the projected result back onto `residual`.
Tensor attend(Tape& tape, ParamContext& ctx, const std::string& prefix, int dim, int heads,
              Tensor residual, Tensor q_in, Tensor kv_in, AttnTrace* trace) {
  const int dh = dim / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor merged;
  for (int h = 0; h < heads; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    Tensor q = tape.matmul(q_in, ctx(hp + ".wq"));   // (n, dh)
    Tensor k = tape.matmul(kv_in, ctx(hp + ".wk"));  // (m, dh)
    Tensor v = tape.matmul(kv_in, ctx(hp + ".wv"));  // (m, dh)
    Tensor logits = tape.scale(tape.matmul(q, tape.transpose(k)), inv_scale);  // (n, m)
    Tensor probs = tape.softmax(logits);
    if (trace) trace->probs.push_back(probs);
    Tensor head = tape.matmul(probs, v);  // (n, dh)
    merged = h == 0 ? head : tape.concat_last(merged, head);
  }
  Tensor proj = tape.add(tape.matmul(merged, ctx(prefix + ".wo")), ctx(prefix + ".bo"));
  return tape.add(residual, proj);
}

}  // namespace

void register_attention(ParamStore& store, const std::string& prefix, int dim, int heads,
                        Rng& rng, bool cross) {
  check_heads(dim, heads);
  const int dh = dim / heads;
  register_norm(store, prefix + ".ln", dim);
  if (cross) register_norm(store, prefix + ".lnkv", dim);
  for (int h = 0; h < heads; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    store.add(hp + ".wq", Shape{dim, dh}, kaiming(dim, dh, rng));
    store.add(hp + ".wk", Shape{dim, dh}, kaiming(dim, dh, rng));
    store.add(hp + ".wv", Shape{dim, dh}, kaiming(dim, dh, rng));
  }
  store.add(prefix + ".wo", Shape{dim, dim}, kaiming(dim, dim, rng));
  store.add(prefix + ".bo", Shape{dim}, std::vector<double>(static_cast<size_t>(dim), 0.0));
}

Tensor self_attention_block(Tape& tape, ParamContext& ctx, const std::string& prefix, int dim,
                            int heads, Tensor x, AttnTrace* trace) {
  check_heads(dim, heads);
  if (x.shape().rank() != 2 || x.shape().dim(1) != dim)
    throw std::invalid_argument("self_attention: want (n," + std::to_string(dim) + "), got " +
                                x.shape().str());
  Tensor xn = norm(tape, ctx, prefix + ".ln", x);
  return attend(tape, ctx, prefix, dim, heads, x, xn, xn, trace);
}

Tensor cross_attention_block(Tape& tape, ParamContext& ctx, const std::string& prefix, int dim,
                             int heads, Tensor x, Tensor memory, AttnTrace* trace) {
  check_heads(dim, heads);
  if (x.shape().dim(1) != dim || memory.shape().dim(1) != dim)
    throw std::invalid_argument("cross_attention: width mismatch");
  Tensor xn = norm(tape, ctx, prefix + ".ln", x);
  Tensor mn = norm(tape, ctx, prefix + ".lnkv", memory);
  return attend(tape, ctx, prefix, dim, heads, x, xn, mn, trace);
}

void register_ffn(ParamStore& store, const std::string& prefix, int dim, int hidden_dim,
                  Rng& rng) {
  register_norm(store, prefix + ".ln", dim);
  MlpSpec spec;
  spec.dims = {dim, hidden_dim, dim};
  register_mlp(store, prefix, spec, rng);
}

Tensor ffn_block(Tape& tape, ParamContext& ctx, const std::string& prefix, int dim,
                 int hidden_dim, Tensor x) {
  MlpSpec spec;
  spec.dims = {dim, hidden_dim, dim};
  Tensor xn = norm(tape, ctx, prefix + ".ln", x);
  return tape.add(x, mlp_forward(tape, ctx, prefix, spec, xn));
}

}  // namespace relc
