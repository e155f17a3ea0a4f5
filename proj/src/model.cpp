// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "relc/rng.hpp"

namespace relc {

namespace {

MlpSpec linear(int in, int out, bool zero = false) {
  MlpSpec s;
  s.dims = {in, out};
  s.final_act = Act::None;
  s.zero_init_final = zero;
  return s;
}

MlpSpec two_layer(int in, int hidden, int out, double slope, Act final_act = Act::None) {
  MlpSpec s;
  s.dims = {in, hidden, out};
  s.hidden = Act::LeakyRelu;
  s.final_act = final_act;
  s.leaky_slope = slope;
  return s;
}

PointCloud cloud_from(const Tensor& t) {
  const Shape& s = t.shape();
  if (s.rank() != 2 || s.dim(1) != 3)
    throw std::invalid_argument("cloud_from: want (n,3), got " + s.str());
  PointCloud c;
  auto v = t.values();
  for (int i = 0; i < s.dim(0); ++i)
    c.add({v[static_cast<size_t>(i) * 3], v[static_cast<size_t>(i) * 3 + 1],
           v[static_cast<size_t>(i) * 3 + 2]});
  return c;
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

LgrpConfig corr_lgrp(const ModelConfig& cfg, int in_dim, int out_dim) {
  LgrpConfig c;
  c.k = cfg.corr_k;
  c.m_subset = cfg.corr_m;
  c.in_dim = in_dim;
  c.out_dim = out_dim;
  c.weight_hidden = 16;  // the whole module stays below width 32
  c.leaky_slope = cfg.leaky_slope;
  c.use_relation_weights = cfg.extractor.use_relation_weights;
  return c;
}

}  // namespace

void ModelConfig::validate() const {
  extractor.validate();
  if (enc_blocks < 1 || dec_blocks < 1) throw std::invalid_argument("config: need >= 1 block");
  if (heads < 1 || dim() % heads != 0)
    throw std::invalid_argument("config: heads must divide proxy width");
  if (ffn_mult < 1) throw std::invalid_argument("config: ffn_mult >= 1");
  if (n_proxy < 1) throw std::invalid_argument("config: n_proxy >= 1");
  if (upsample < 1) throw std::invalid_argument("config: upsample >= 1");
  if (rho <= 0.0) throw std::invalid_argument("config: rho > 0");
  if (use_correction) {
    if (corr_mid < 1 || corr_widths[0] <= corr_mid || corr_widths[1] <= corr_widths[0])
      throw std::invalid_argument("config: correction widths must increase");
    if (corr_stage_a < n_proxy)
      throw std::invalid_argument("config: corr_stage_a must be >= n_proxy");
    if (corr_stage_a > n_proxy + corr_dense)
      throw std::invalid_argument("config: corr_stage_a exceeds available rows");
    if (corr_heads < 1 || corr_mid % corr_heads != 0)
      throw std::invalid_argument("config: corr_heads must divide corr_mid");
    if (corr_m < 1 || corr_m > corr_k) throw std::invalid_argument("config: corr_m in [1, k]");
  }
}

CompletionModel::CompletionModel(ModelConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void CompletionModel::register_params(ParamStore& store, Rng& rng) const {
  const int d = cfg_.dim();
  const double slope = cfg_.leaky_slope;
  register_extractor(store, "extractor", cfg_.extractor, rng);
  for (int b = 0; b < cfg_.enc_blocks; ++b) {
    const std::string p = "encoder.block" + std::to_string(b);
    register_attention(store, p + ".attn", d, cfg_.heads, rng);
    register_ffn(store, p + ".ffn", d, cfg_.ffn_mult * d, rng);
  }
  register_mlp(store, "generator.coord", two_layer(d, d, 3 * cfg_.n_proxy, slope, Act::None),
               rng);
  register_mlp(store, "generator.feat", two_layer(d + 3, d, d, slope), rng);
  if (cfg_.use_correction) {
    register_mlp(store, "correction.proj_in", linear(d, cfg_.corr_mid), rng);
    register_mlp(store, "correction.lift", linear(3, cfg_.corr_mid), rng);
    register_attention(store, "correction.attn", cfg_.corr_mid, cfg_.corr_heads, rng);
    register_stlfe(store, "correction.stlfe_a", corr_lgrp(cfg_, cfg_.corr_mid, cfg_.corr_widths[0]),
                   rng);
    register_stlfe(store, "correction.stlfe_b",
                   corr_lgrp(cfg_, cfg_.corr_widths[0], cfg_.corr_widths[1]), rng);
    register_mlp(store, "correction.proj_out", linear(cfg_.corr_widths[1], d, /*zero=*/true), rng);
  }
  register_mlp(store, "decoder.pos", two_layer(3, d, d, slope), rng);
  for (int b = 0; b < cfg_.dec_blocks; ++b) {
    const std::string p = "decoder.block" + std::to_string(b);
    register_attention(store, p + ".self", d, cfg_.heads, rng);
    register_attention(store, p + ".cross", d, cfg_.heads, rng, /*cross=*/true);
    register_ffn(store, p + ".ffn", d, cfg_.ffn_mult * d, rng);
  }
  register_mlp(store, "rebuild.offset", two_layer(d, d, 3 * cfg_.upsample, slope, Act::None),
               rng);
}

Tensor CompletionModel::encode(Tape& tape, ParamContext& ctx, Tensor x, AttnTrace* trace) const {
  const int d = cfg_.dim();
  for (int b = 0; b < cfg_.enc_blocks; ++b) {
    const std::string p = "encoder.block" + std::to_string(b);
    x = self_attention_block(tape, ctx, p + ".attn", d, cfg_.heads, x, trace);
    x = ffn_block(tape, ctx, p + ".ffn", d, cfg_.ffn_mult * d, x);
  }
  return x;
}

Proxies CompletionModel::generate_proxies(Tape& tape, ParamContext& ctx, Tensor latent) const {
  const int d = cfg_.dim();
  if (latent.shape().rank() != 2 || latent.shape().dim(1) != d)
    throw std::invalid_argument("generate_proxies: latent must be (n," + std::to_string(d) + ")");
  Proxies out;
  out.global = tape.max_over_axis(latent, 0);  // (1, d)
  Tensor raw = mlp_forward(tape, ctx, "generator.coord",
                           two_layer(d, d, 3 * cfg_.n_proxy, cfg_.leaky_slope, Act::None),
                           out.global);
  // radial tanh squashes each row into the unit ball while preserving its
  // direction, so proxies can reach the full surface extent
  out.coords = tape.radial_cap(tape.reshape(raw, Shape{cfg_.n_proxy, 3}), 1.0);
  Tensor feat_in =
      tape.concat_last(tape.repeat_rows(out.global, cfg_.n_proxy), out.coords);
  out.feats = mlp_forward(tape, ctx, "generator.feat",
                          two_layer(d + 3, d, d, cfg_.leaky_slope), feat_in);
  out.host = cloud_from(out.coords);
  return out;
}

Proxies CompletionModel::correct_proxies(Tape& tape, ParamContext& ctx, const Proxies& proxies,
                                         const PointCloud& dense_input, std::uint64_t seed,
                                         AttnTrace* trace) const {
  if (!cfg_.use_correction)
    throw std::invalid_argument("correct_proxies: correction disabled in config");
  const int d = cfg_.dim();
  const int np = cfg_.n_proxy;
  const int nd = dense_input.count();
  if (nd + np < cfg_.corr_stage_a || nd < 1 || cfg_.corr_k > nd + np)
    throw std::invalid_argument("correct_proxies: dense input too small for the schedule");

  Tensor dense_coords = tape.constant(Shape{nd, 3}, flatten(dense_input));
  Tensor proxy8 = mlp_forward(tape, ctx, "correction.proj_in", linear(d, cfg_.corr_mid),
                              proxies.feats);
  Tensor dense8 = mlp_forward(tape, ctx, "correction.lift", linear(3, cfg_.corr_mid),
                              dense_coords);
  Tensor feats = tape.concat_rows(proxy8, dense8);                   // (np+nd, mid)
  Tensor coords = tape.concat_rows(proxies.coords, dense_coords);    // (np+nd, 3)
  PointCloud coords_host = proxies.host;
  for (const auto& p : dense_input.points()) coords_host.add(p);

  feats = self_attention_block(tape, ctx, "correction.attn", cfg_.corr_mid, cfg_.corr_heads,
                               feats, trace);

  // Stage A keeps every proxy row and fills the remainder by FPS over the
  // reintroduced input points, so stage B can address proxies as rows 0..np.
  std::vector<int> centers_a(static_cast<size_t>(np));
  std::iota(centers_a.begin(), centers_a.end(), 0);
  const int extra = cfg_.corr_stage_a - np;
  if (extra > 0) {
    std::vector<int> dense_pick = farthest_point_sample(dense_input, extra, mix_seed(seed, 1));
    for (int id : dense_pick) centers_a.push_back(np + id);
  }
  StlfeOut a = st_lfe(tape, ctx, "correction.stlfe_a", corr_lgrp(cfg_, cfg_.corr_mid,
                      cfg_.corr_widths[0]), coords_host, coords, feats, cfg_.corr_stage_a,
                      mix_seed(seed, 2), &centers_a);

  std::vector<int> centers_b(static_cast<size_t>(np));
  std::iota(centers_b.begin(), centers_b.end(), 0);
  StlfeOut b = st_lfe(tape, ctx, "correction.stlfe_b", corr_lgrp(cfg_, cfg_.corr_widths[0],
                      cfg_.corr_widths[1]), a.coords_host, a.coords, a.feats, np,
                      mix_seed(seed, 3), &centers_b);

  Tensor delta = mlp_forward(tape, ctx, "correction.proj_out",
                             linear(cfg_.corr_widths[1], d, /*zero=*/true), b.feats);
  Proxies out = proxies;
  out.feats = tape.add(proxies.feats, delta);
  return out;
}

Tensor CompletionModel::decode(Tape& tape, ParamContext& ctx, Tensor queries, Tensor latent,
                               AttnTrace* trace) const {
  const int d = cfg_.dim();
  Tensor x = queries;
  for (int b = 0; b < cfg_.dec_blocks; ++b) {
    const std::string p = "decoder.block" + std::to_string(b);
    x = self_attention_block(tape, ctx, p + ".self", d, cfg_.heads, x, trace);
    x = cross_attention_block(tape, ctx, p + ".cross", d, cfg_.heads, x, latent, trace);
    x = ffn_block(tape, ctx, p + ".ffn", d, cfg_.ffn_mult * d, x);
  }
  return x;
}

Tensor CompletionModel::rebuild(Tape& tape, ParamContext& ctx, Tensor decoded,
                                Tensor coords) const {
  const int d = cfg_.dim();
  const int u = cfg_.upsample;
  const int n = decoded.shape().dim(0);
  if (coords.shape() != Shape{n, 3})
    throw std::invalid_argument("rebuild: coords misaligned with decoded features");
  Tensor raw = mlp_forward(tape, ctx, "rebuild.offset",
                           two_layer(d, d, 3 * u, cfg_.leaky_slope, Act::None), decoded);
  // radial tanh bounds the Euclidean offset norm by rho without shrinking
  // the per-axis reach
  Tensor off =
      tape.reshape(tape.radial_cap(tape.reshape(raw, Shape{n * u, 3}), cfg_.rho), Shape{n, u, 3});
  Tensor centers = tape.broadcast_mid(coords, u);
  return tape.reshape(tape.add(off, centers), Shape{n * u, 3});
}

ModelOutput CompletionModel::forward(Tape& tape, ParamContext& ctx, const PointCloud& partial,
                                     std::uint64_t seed, const PointCloud* denoise_centers,
                                     AttnTrace* trace, bool apply_correction) const {
  const int d = cfg_.dim();
  ExtractOut ex = extract(tape, ctx, "extractor", partial, cfg_.extractor, mix_seed(seed, 1),
                          trace);
  Tensor latent = encode(tape, ctx, tape.add(ex.feats, ex.pos_embed), trace);
  Proxies proxies = generate_proxies(tape, ctx, latent);

  if (cfg_.use_correction && apply_correction) {
    if (partial.count() < cfg_.corr_dense)
      throw std::invalid_argument("forward: partial cloud smaller than corr_dense");
    std::vector<int> ids = farthest_point_sample(partial, cfg_.corr_dense, mix_seed(seed, 2));
    proxies = correct_proxies(tape, ctx, proxies, partial.select(ids), mix_seed(seed, 3), trace);
  }

  const MlpSpec pos = two_layer(3, d, d, cfg_.leaky_slope);
  Tensor q_feats = tape.add(proxies.feats, mlp_forward(tape, ctx, "decoder.pos", pos,
                                                       proxies.coords));
  Tensor q_coords = proxies.coords;
  int n_dq = 0;
  if (denoise_centers && denoise_centers->count() > 0) {
    n_dq = denoise_centers->count();
    Tensor dn_coords = tape.constant(Shape{n_dq, 3}, flatten(*denoise_centers));
    Tensor dn_in = tape.concat_last(tape.repeat_rows(proxies.global, n_dq), dn_coords);
    Tensor dn_feats = mlp_forward(tape, ctx, "generator.feat",
                                  two_layer(d + 3, d, d, cfg_.leaky_slope), dn_in);
    dn_feats = tape.add(dn_feats, mlp_forward(tape, ctx, "decoder.pos", pos, dn_coords));
    q_feats = tape.concat_rows(q_feats, dn_feats);
    q_coords = tape.concat_rows(q_coords, dn_coords);
  }

  Tensor decoded = decode(tape, ctx, q_feats, latent, trace);
  Tensor all_points = rebuild(tape, ctx, decoded, q_coords);  // ((np+ndq)*u, 3)

  ModelOutput out;
  out.proxies = proxies;
  const int dense_rows = cfg_.dense_out();
  if (n_dq == 0) {
    out.dense_points = all_points;
  } else {
    std::vector<int> head(static_cast<size_t>(dense_rows));
    std::iota(head.begin(), head.end(), 0);
    out.dense_points = tape.gather_rows(all_points, head);
    std::vector<int> tail(static_cast<size_t>(n_dq * cfg_.upsample));
    std::iota(tail.begin(), tail.end(), dense_rows);
    out.denoise_points = tape.gather_rows(all_points, tail);
  }
  out.dense_host = cloud_from(out.dense_points);
  return out;
}

}  // namespace relc
