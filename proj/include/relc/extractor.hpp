// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Progressive coarse-to-fine feature extraction: one dense EdgeConv pass
// over the raw input, then two rounds of global self-attention followed by
// ST-LFE pruning/expansion, ending in sparse point proxies with positional
// embeddings.
#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "relc/attention.hpp"
#include "relc/geometry.hpp"
#include "relc/relation.hpp"

namespace relc {

struct ExtractorSchedule {
  int dense_count = 512;
  int dense_dim = 16;
  std::array<int, 2> stage_counts{256, 128};  // strictly decreasing from dense_count
  std::array<int, 2> stage_dims{32, 64};      // strictly increasing from dense_dim
  int attn_heads = 2;
  int k = 16;
  int m_subset = 4;
  bool use_relation_weights = true;
  double leaky_slope = 0.2;

  int final_count() const { return stage_counts[1]; }
  int final_dim() const { return stage_dims[1]; }
  void validate() const;  // throws std::invalid_argument on a bad schedule
};

struct ExtractOut {
  PointCloud coords_host;  // final-stage proxy coordinates
  Tensor coords;           // (final_count, 3)
  Tensor feats;            // (final_count, final_dim)
  Tensor pos_embed;        // (final_count, final_dim)
};

void register_extractor(ParamStore& store, const std::string& prefix,
                        const ExtractorSchedule& sched, Rng& rng);

struct EdgeConvOut {
  std::vector<int> sample_ids;
  PointCloud coords_host;
  Tensor coords;  // (dense_count, 3)
  Tensor feats;   // (dense_count, out_dim)
};

/// Single EdgeConv layer over the full input (raw coordinates as features),
/// then FPS down to dense_count rows.
EdgeConvOut edgeconv_single(Tape& tape, ParamContext& ctx, const std::string& prefix,
                            const PointCloud& input, int k, int dense_count, int out_dim,
                            double leaky_slope, std::uint64_t seed);

/// Full pipeline: edgeconv -> [attention -> st_lfe] x2 -> positional MLP.
ExtractOut extract(Tape& tape, ParamContext& ctx, const std::string& prefix,
                   const PointCloud& partial, const ExtractorSchedule& sched, std::uint64_t seed,
                   AttnTrace* trace = nullptr);

}  // namespace relc
