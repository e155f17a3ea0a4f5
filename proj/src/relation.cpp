// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/relation.hpp"

#include <algorithm>
#include <stdexcept>

namespace relc {

namespace {

MlpSpec edge_spec(const LgrpConfig& cfg) {
  const int hidden = cfg.edge_hidden > 0 ? cfg.edge_hidden : cfg.out_dim;
  MlpSpec s;
  s.dims = {2 * cfg.in_dim, hidden, cfg.out_dim};
  s.hidden = Act::LeakyRelu;
  s.final_act = Act::LeakyRelu;
  s.leaky_slope = cfg.leaky_slope;
  return s;
}

MlpSpec weight_spec(const LgrpConfig& cfg) {
  MlpSpec s;
  s.dims = {3 + cfg.in_dim, cfg.weight_hidden, cfg.out_dim};
  s.hidden = Act::LeakyRelu;
  s.final_act = Act::Sigmoid;
  s.leaky_slope = cfg.leaky_slope;
  return s;
}

}  // namespace

Tensor compute_r1(Tape& tape, Tensor query_coords, Tensor neighbor_coords) {
  const Shape& sq = query_coords.shape();
  const Shape& sn = neighbor_coords.shape();
  if (sq.rank() != 2 || sn.rank() != 3 || sq.dim(0) != sn.dim(0) || sq.dim(1) != sn.dim(2))
    throw std::invalid_argument("compute_r1: want (m,3) and (m,k,3), got " + sq.str() + " and " +
                                sn.str());
  Tensor q = tape.broadcast_mid(query_coords, sn.dim(1));
  return tape.abs(tape.sub(q, neighbor_coords));
}

std::vector<int> nearest_subset_positions(const NeighborIndex& index, int m_subset) {
  if (m_subset < 1 || m_subset > index.k)
    throw std::invalid_argument("m_subset must lie in [1, k]");
  std::vector<int> positions(static_cast<size_t>(index.n_query) * m_subset);
  std::vector<int> order(static_cast<size_t>(index.k));
  for (int q = 0; q < index.n_query; ++q) {
    for (int j = 0; j < index.k; ++j) order[static_cast<size_t>(j)] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = index.distance(q, a), db = index.distance(q, b);
      if (da != db) return da < db;
      return index.id(q, a) < index.id(q, b);
    });
    for (int j = 0; j < m_subset; ++j)
      positions[static_cast<size_t>(q) * m_subset + j] = order[static_cast<size_t>(j)];
  }
  return positions;
}

Tensor compute_r2_at(Tape& tape, Tensor query_feats, Tensor neighbor_feats,
                     const std::vector<int>& positions, int m_subset) {
  const Shape& sq = query_feats.shape();
  const Shape& sn = neighbor_feats.shape();
  if (sq.rank() != 2 || sn.rank() != 3 || sq.dim(0) != sn.dim(0) || sq.dim(1) != sn.dim(2))
    throw std::invalid_argument("compute_r2: want (m,d) and (m,k,d), got " + sq.str() + " and " +
                                sn.str());
  const int k = sn.dim(1);
  if (m_subset < 1 || m_subset > k) throw std::invalid_argument("compute_r2: m_subset > k");
  if (static_cast<int>(positions.size()) != sq.dim(0) * m_subset)
    throw std::invalid_argument("compute_r2: positions size mismatch");
  Tensor edges = tape.sub(neighbor_feats, tape.broadcast_mid(query_feats, k));  // (m,k,d)
  Tensor subset = tape.gather_mid(edges, positions, m_subset);                  // (m,M,d)
  Tensor mean_edge = tape.mean_over_axis(subset, 1);                            // (m,d)
  return tape.abs(tape.sub(tape.broadcast_mid(mean_edge, k), edges));
}

Tensor compute_r2(Tape& tape, Tensor query_feats, Tensor neighbor_feats, int m_subset) {
  const Shape& sn = neighbor_feats.shape();
  if (sn.rank() != 3) throw std::invalid_argument("compute_r2: neighbors must be rank 3");
  std::vector<int> positions(static_cast<size_t>(sn.dim(0)) * m_subset);
  for (int q = 0; q < sn.dim(0); ++q)
    for (int j = 0; j < m_subset; ++j) positions[static_cast<size_t>(q) * m_subset + j] = j;
  return compute_r2_at(tape, query_feats, neighbor_feats, positions, m_subset);
}

void register_lgrp(ParamStore& store, const std::string& prefix, const LgrpConfig& cfg, Rng& rng) {
  register_mlp(store, prefix + ".edge", edge_spec(cfg), rng);
  register_mlp(store, prefix + ".weight", weight_spec(cfg), rng);
}

Tensor lgrp_forward(Tape& tape, ParamContext& ctx, const std::string& prefix,
                    const LgrpConfig& cfg, Tensor query_coords, Tensor query_feats,
                    Tensor neighbor_coords, Tensor neighbor_feats, const NeighborIndex& index) {
  const Shape& sf = neighbor_feats.shape();
  if (sf.rank() != 3 || sf.dim(2) != cfg.in_dim)
    throw std::invalid_argument("lgrp_forward: neighbor feats " + sf.str() + " vs in_dim " +
                                std::to_string(cfg.in_dim));
  const int m = sf.dim(0), k = sf.dim(1);
  if (index.n_query != m || index.k != k)
    throw std::invalid_argument("lgrp_forward: index does not match neighbor tensor");

  Tensor q_feats_bc = tape.broadcast_mid(query_feats, k);                // (m,k,d)
  Tensor edges = tape.sub(neighbor_feats, q_feats_bc);                   // vec(Q,V_i)
  Tensor left_in = tape.concat_last(q_feats_bc, edges);                  // (m,k,2d)
  Tensor left = mlp_forward(tape, ctx, prefix + ".edge", edge_spec(cfg), left_in);

  Tensor combined = left;
  if (cfg.use_relation_weights) {
    Tensor r1 = compute_r1(tape, query_coords, neighbor_coords);
    std::vector<int> subset = nearest_subset_positions(index, cfg.m_subset);
    Tensor r2 = compute_r2_at(tape, query_feats, neighbor_feats, subset, cfg.m_subset);
    Tensor w_in = tape.concat_last(r1, r2);                              // (m,k,3+d)
    Tensor weights = mlp_forward(tape, ctx, prefix + ".weight", weight_spec(cfg), w_in);
    combined = tape.mul(left, weights);
  }
  return tape.max_over_axis(combined, 1);  // (m,out_dim)
}

void register_stlfe(ParamStore& store, const std::string& prefix, const LgrpConfig& cfg,
                    Rng& rng) {
  register_lgrp(store, prefix + ".lgrp", cfg, rng);
}

StlfeOut st_lfe(Tape& tape, ParamContext& ctx, const std::string& prefix, const LgrpConfig& cfg,
                const PointCloud& coords_host, Tensor coords, Tensor feats, int out_count,
                std::uint64_t seed, const std::vector<int>* explicit_centers) {
  const int n = coords_host.count();
  if (out_count < 1 || out_count > n)
    throw std::invalid_argument("st_lfe: out_count " + std::to_string(out_count) +
                                " exceeds input count " + std::to_string(n));
  if (coords.shape() != Shape{n, 3} || feats.shape() != Shape{n, cfg.in_dim})
    throw std::invalid_argument("st_lfe: tensor shapes disagree with input cloud");

  StlfeOut out;
  out.center_ids = explicit_centers ? *explicit_centers
                                    : farthest_point_sample(coords_host, out_count, seed);
  if (static_cast<int>(out.center_ids.size()) != out_count)
    throw std::invalid_argument("st_lfe: center count mismatch");
  out.coords_host = coords_host.select(out.center_ids);

  NeighborIndex index = knn(out.coords_host, coords_host, cfg.k);
  out.coords = tape.gather_rows(coords, out.center_ids);
  Tensor query_feats = tape.gather_rows(feats, out.center_ids);
  Tensor neighbor_coords = tape.gather_neighbors(coords, index.ids, cfg.k);
  Tensor neighbor_feats = tape.gather_neighbors(feats, index.ids, cfg.k);
  out.feats = lgrp_forward(tape, ctx, prefix + ".lgrp", cfg, out.coords, query_feats,
                           neighbor_coords, neighbor_feats, index);
  return out;
}

}  // namespace relc
