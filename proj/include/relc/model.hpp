// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// The completion stack: transformer encoder over extracted proxies, a
// global-pool proxy generator for the missing region, a low-width proxy
// correction module that re-reads a dense resample of the input, a decoder
// with cross-attention into the encoder latent, and an offset-MLP rebuild
// head that upsamples each proxy into a local patch.
#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "relc/attention.hpp"
#include "relc/extractor.hpp"

namespace relc {

struct ModelConfig {
  ExtractorSchedule extractor;
  int enc_blocks = 6;
  int dec_blocks = 8;
  int heads = 2;      // transformer heads at the proxy feature width
  int ffn_mult = 1;   // feed-forward hidden = ffn_mult * dim

  int n_proxy = 64;

  bool use_correction = true;
  int corr_dense = 384;                 // input points re-introduced
  int corr_mid = 8;                     // lifted width entering the module
  std::array<int, 2> corr_widths{16, 24};
  int corr_stage_a = 128;               // stage-A row count (>= n_proxy)
  int corr_heads = 2;
  int corr_k = 16;
  int corr_m = 4;

  int upsample = 16;   // u: dense points per proxy
  double rho = 0.15;   // local offset radius bound
  double leaky_slope = 0.2;

  int dim() const { return extractor.final_dim(); }
  int dense_out() const { return n_proxy * upsample; }
  void validate() const;
};

struct Proxies {
  Tensor coords;   // (n_proxy, 3)
  Tensor feats;    // (n_proxy, d)
  Tensor global;   // (1, d) pooled latent the generator worked from
  PointCloud host; // coords mirrored on the host
};

struct ModelOutput {
  Proxies proxies;        // post-correction sparse prediction C
  Tensor dense_points;    // (n_proxy * u, 3) dense prediction P
  Tensor denoise_points;  // (n_queries * u, 3); invalid when no queries given
  PointCloud dense_host;
};

class CompletionModel {
 public:
  explicit CompletionModel(ModelConfig cfg);
  const ModelConfig& config() const { return cfg_; }

  /// Registers every parameter in a fixed order under the namespaces
  /// extractor.*, encoder.*, generator.*, correction.*, decoder.*, rebuild.*.
  void register_params(ParamStore& store, Rng& rng) const;

  Tensor encode(Tape& tape, ParamContext& ctx, Tensor x, AttnTrace* trace = nullptr) const;
  Proxies generate_proxies(Tape& tape, ParamContext& ctx, Tensor latent) const;
  Proxies correct_proxies(Tape& tape, ParamContext& ctx, const Proxies& proxies,
                          const PointCloud& dense_input, std::uint64_t seed,
                          AttnTrace* trace = nullptr) const;
  Tensor decode(Tape& tape, ParamContext& ctx, Tensor queries, Tensor latent,
                AttnTrace* trace = nullptr) const;
  /// decoded (n, d) + coords (n, 3) -> (n * upsample, 3) local patches.
  Tensor rebuild(Tape& tape, ParamContext& ctx, Tensor decoded, Tensor coords) const;

  /// Full pipeline on a normalized partial cloud. When denoise_centers is
  /// given (already-noised coordinates), those rows join the decoder queries
  /// and their rebuilt patches come back in denoise_points, patch i at rows
  /// [i*u, (i+1)*u). `apply_correction` overrides config().use_correction;
  /// pass use_correction for normal behavior.
  ModelOutput forward(Tape& tape, ParamContext& ctx, const PointCloud& partial,
                      std::uint64_t seed, const PointCloud* denoise_centers = nullptr,
                      AttnTrace* trace = nullptr, bool apply_correction = true) const;

 private:
  ModelConfig cfg_;
};

}  // namespace relc
