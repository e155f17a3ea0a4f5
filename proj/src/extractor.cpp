// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/extractor.hpp"

#include <stdexcept>

#include "relc/rng.hpp"

namespace relc {

namespace {

MlpSpec dgcnn_spec(int out_dim, double slope) {
  MlpSpec s;
  s.dims = {6, out_dim, out_dim};
  s.hidden = Act::LeakyRelu;
  s.final_act = Act::LeakyRelu;
  s.leaky_slope = slope;
  return s;
}

MlpSpec pos_spec(int out_dim, double slope) {
  MlpSpec s;
  s.dims = {3, out_dim, out_dim};
  s.hidden = Act::LeakyRelu;
  s.final_act = Act::None;
  s.leaky_slope = slope;
  return s;
}

std::vector<double> flatten(const PointCloud& c) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(c.count()) * 3);
  for (const auto& p : c.points()) {
    v.push_back(p.x);
    v.push_back(p.y);
    v.push_back(p.z);
  }
  return v;
}

LgrpConfig stage_cfg(const ExtractorSchedule& sched, int in_dim, int out_dim) {
  LgrpConfig cfg;
  cfg.k = sched.k;
  cfg.m_subset = sched.m_subset;
  cfg.in_dim = in_dim;
  cfg.out_dim = out_dim;
  cfg.leaky_slope = sched.leaky_slope;
  cfg.use_relation_weights = sched.use_relation_weights;
  return cfg;
}

}  // namespace

void ExtractorSchedule::validate() const {
  if (dense_count < 1 || dense_dim < 1) throw std::invalid_argument("schedule: bad dense stage");
  if (!(stage_counts[0] < dense_count && stage_counts[1] < stage_counts[0]))
    throw std::invalid_argument("schedule: stage counts must strictly decrease");
  if (!(stage_dims[0] > dense_dim && stage_dims[1] > stage_dims[0]))
    throw std::invalid_argument("schedule: stage dims must strictly increase");
  if (attn_heads < 1 || dense_dim % attn_heads != 0 || stage_dims[0] % attn_heads != 0)
    throw std::invalid_argument("schedule: heads must divide attention widths");
  if (k < 1 || m_subset < 1 || m_subset > k)
    throw std::invalid_argument("schedule: need 1 <= m_subset <= k");
}

void register_extractor(ParamStore& store, const std::string& prefix,
                        const ExtractorSchedule& sched, Rng& rng) {
  sched.validate();
  register_mlp(store, prefix + ".dgcnn", dgcnn_spec(sched.dense_dim, sched.leaky_slope), rng);
  register_attention(store, prefix + ".attn1", sched.dense_dim, sched.attn_heads, rng);
  register_stlfe(store, prefix + ".stlfe1", stage_cfg(sched, sched.dense_dim, sched.stage_dims[0]),
                 rng);
  register_attention(store, prefix + ".attn2", sched.stage_dims[0], sched.attn_heads, rng);
  register_stlfe(store, prefix + ".stlfe2",
                 stage_cfg(sched, sched.stage_dims[0], sched.stage_dims[1]), rng);
  register_mlp(store, prefix + ".pos", pos_spec(sched.final_dim(), sched.leaky_slope), rng);
}

EdgeConvOut edgeconv_single(Tape& tape, ParamContext& ctx, const std::string& prefix,
                            const PointCloud& input, int k, int dense_count, int out_dim,
                            double leaky_slope, std::uint64_t seed) {
  const int n = input.count();
  if (dense_count > n)
    throw std::invalid_argument("edgeconv: dense_count " + std::to_string(dense_count) +
                                " exceeds input count " + std::to_string(n));
  NeighborIndex index = knn(input, input, k);
  Tensor coords = tape.constant(Shape{n, 3}, flatten(input));

  Tensor center = tape.broadcast_mid(coords, k);                       // (n,k,3)
  Tensor nbrs = tape.gather_neighbors(coords, index.ids, k);           // (n,k,3)
  Tensor edge_in = tape.concat_last(center, tape.sub(nbrs, center));   // (n,k,6)
  Tensor per_edge = mlp_forward(tape, ctx, prefix + ".dgcnn", dgcnn_spec(out_dim, leaky_slope),
                                edge_in);
  Tensor feats_all = tape.max_over_axis(per_edge, 1);                  // (n,out_dim)

  EdgeConvOut out;
  out.sample_ids = farthest_point_sample(input, dense_count, seed);
  out.coords_host = input.select(out.sample_ids);
  out.coords = tape.gather_rows(coords, out.sample_ids);
  out.feats = tape.gather_rows(feats_all, out.sample_ids);
  return out;
}

ExtractOut extract(Tape& tape, ParamContext& ctx, const std::string& prefix,
                   const PointCloud& partial, const ExtractorSchedule& sched, std::uint64_t seed,
                   AttnTrace* trace) {
  sched.validate();
  EdgeConvOut phase1 = edgeconv_single(tape, ctx, prefix, partial, sched.k, sched.dense_count,
                                       sched.dense_dim, sched.leaky_slope, mix_seed(seed, 1));

  Tensor f0 = self_attention_block(tape, ctx, prefix + ".attn1", sched.dense_dim,
                                   sched.attn_heads, phase1.feats, trace);
  StlfeOut s1 = st_lfe(tape, ctx, prefix + ".stlfe1",
                       stage_cfg(sched, sched.dense_dim, sched.stage_dims[0]), phase1.coords_host,
                       phase1.coords, f0, sched.stage_counts[0], mix_seed(seed, 2));

  Tensor f1 = self_attention_block(tape, ctx, prefix + ".attn2", sched.stage_dims[0],
                                   sched.attn_heads, s1.feats, trace);
  StlfeOut s2 = st_lfe(tape, ctx, prefix + ".stlfe2",
                       stage_cfg(sched, sched.stage_dims[0], sched.stage_dims[1]), s1.coords_host,
                       s1.coords, f1, sched.stage_counts[1], mix_seed(seed, 3));

  ExtractOut out;
  out.coords_host = s2.coords_host;
  out.coords = s2.coords;
  out.feats = s2.feats;
  out.pos_embed = mlp_forward(tape, ctx, prefix + ".pos",
                              pos_spec(sched.final_dim(), sched.leaky_slope), s2.coords);
  return out;
}

}  // namespace relc
