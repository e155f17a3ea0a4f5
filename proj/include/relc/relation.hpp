// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Relation-based local feature perception. R1 measures per-axis coordinate
// offsets between a target point and each neighbor; R2 measures how far each
// directed feature edge deviates from the mean edge over the M nearest
// neighbors. LGRP turns concat(R1, R2) into learned per-channel contribution
// weights, multiplies them into EdgeConv-style neighbor features, and
// max-pools over the neighborhood. ST-LFE wraps LGRP with farthest point
// sampling so one block both prunes point count and expands feature width.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relc/geometry.hpp"
#include "relc/nn.hpp"
#include "relc/tensor.hpp"

namespace relc {

struct LgrpConfig {
  int k = 16;
  int m_subset = 4;   // M points averaged for R2's mean edge
  int in_dim = 3;
  int out_dim = 16;
  int weight_hidden = 32;
  int edge_hidden = 0;           // 0 → use out_dim as the hidden width
  double leaky_slope = 0.2;
  bool use_relation_weights = true;  // false → unit weights (ablation)
};

/// r1[q][i] = |coords(Q_q) − coords(V_i)| per axis.
/// query (m,3), neighbors (m,k,3) → (m,k,3).
Tensor compute_r1(Tape& tape, Tensor query_coords, Tensor neighbor_coords);

/// r2[q][i] = |mean_{j in M nearest} edge(q,j) − edge(q,i)| elementwise with
/// edge(q,i) = feat(V_i) − feat(Q_q). Rows of `neighbor_feats` must be in
/// ascending-distance order; the mean runs over the first m_subset rows.
/// query (m,d), neighbors (m,k,d) → (m,k,d).
Tensor compute_r2(Tape& tape, Tensor query_feats, Tensor neighbor_feats, int m_subset);

/// As above, but the M-subset per query row is given explicitly as row
/// positions (m * m_subset entries). Lets callers pick the subset canonically
/// by (distance, id) so outputs do not depend on neighbor row order.
Tensor compute_r2_at(Tape& tape, Tensor query_feats, Tensor neighbor_feats,
                     const std::vector<int>& positions, int m_subset);

/// Canonical M-subset row positions per query: the m_subset rows with the
/// smallest (distance, id) pairs in the index.
std::vector<int> nearest_subset_positions(const NeighborIndex& index, int m_subset);

void register_lgrp(ParamStore& store, const std::string& prefix, const LgrpConfig& cfg, Rng& rng);

/// query_coords (m,3), query_feats (m,in_dim), neighbor_coords (m,k,3),
/// neighbor_feats (m,k,in_dim); `index` supplies the (distance, id) pairs the
/// canonical R2 subset is chosen by. Returns (m, out_dim).
Tensor lgrp_forward(Tape& tape, ParamContext& ctx, const std::string& prefix,
                    const LgrpConfig& cfg, Tensor query_coords, Tensor query_feats,
                    Tensor neighbor_coords, Tensor neighbor_feats, const NeighborIndex& index);

struct StlfeOut {
  std::vector<int> center_ids;  // input rows selected as centers
  PointCloud coords_host;
  Tensor coords;  // (out_count, 3)
  Tensor feats;   // (out_count, out_dim)
};

void register_stlfe(ParamStore& store, const std::string& prefix, const LgrpConfig& cfg, Rng& rng);

/// Prunes to out_count centers (FPS unless explicit_centers given), gathers
/// each center's k nearest neighbors from the full input, and runs LGRP.
/// `coords` must mirror `coords_host` values row for row.
StlfeOut st_lfe(Tape& tape, ParamContext& ctx, const std::string& prefix, const LgrpConfig& cfg,
                const PointCloud& coords_host, Tensor coords, Tensor feats, int out_count,
                std::uint64_t seed, const std::vector<int>* explicit_centers = nullptr);

}  // namespace relc
