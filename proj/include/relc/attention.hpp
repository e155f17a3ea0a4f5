// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Multi-head scaled dot-product attention built from the tensor ops, in the
// pre-norm residual arrangement: each sublayer computes
//   y = x + W_o · MHA(layer_norm(x), ...)
// Heads use separate projection matrices (d × d/heads each); their outputs
// are concatenated and mixed by the output projection.
#pragma once

#include <string>
#include <vector>

#include "relc/nn.hpp"
#include "relc/tensor.hpp"

namespace relc {

/// Collects every attention probability matrix ((rows, cols), row-stochastic)
/// produced during a forward pass, one tensor per head per sublayer.
struct AttnTrace {
  std::vector<Tensor> probs;
};

/// Parameters: <prefix>.ln.gain/.ln.bias (query norm), and for cross
/// attention additionally <prefix>.lnkv.gain/.lnkv.bias (memory norm);
/// per head <prefix>.h<i>.wq/.wk/.wv; output <prefix>.wo/.bo.
void register_attention(ParamStore& store, const std::string& prefix, int dim, int heads,
                        Rng& rng, bool cross = false);

/// Self attention over x (n, dim). Returns (n, dim) = x + projected heads.
Tensor self_attention_block(Tape& tape, ParamContext& ctx, const std::string& prefix, int dim,
                            int heads, Tensor x, AttnTrace* trace = nullptr);

/// Cross attention: queries from x (n, dim), keys/values from memory
/// (m, dim). Returns (n, dim).
Tensor cross_attention_block(Tape& tape, ParamContext& ctx, const std::string& prefix, int dim,
                             int heads, Tensor x, Tensor memory, AttnTrace* trace = nullptr);

/// Position-wise feed-forward sublayer: x + W1·act(W0·layer_norm(x)+b0)+b1
/// with hidden width hidden_dim. Parameters <prefix>.ln.*, <prefix>.w0/b0/w1/b1.
void register_ffn(ParamStore& store, const std::string& prefix, int dim, int hidden_dim,
                  Rng& rng);
Tensor ffn_block(Tape& tape, ParamContext& ctx, const std::string& prefix, int dim,
                 int hidden_dim, Tensor x);

}  // namespace relc
