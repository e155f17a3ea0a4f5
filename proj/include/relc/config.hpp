// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value run configuration. Every knob of a run lives here so that
// (config, seed, code version) fully determines results. Serialization
// round-trips losslessly (doubles at 17 significant digits); unknown keys
// and malformed values raise ConfigError.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relc/model.hpp"
#include "relc/shapes.hpp"

namespace relc {

struct RunConfig {
  // data
  std::string shape_family = "torus";
  int n_gt_points = 2048;
  int n_input = 512;
  double keep_fraction = 0.5;

  // relation / extractor
  int k = 16;
  int m_subset = 4;
  int dense_count = 256;
  int dense_dim = 16;
  std::vector<int> stage_counts{128, 64};
  std::vector<int> stage_dims{32, 64};
  int attn_heads = 2;
  bool use_relation_weights = true;

  // completion stack
  int enc_blocks = 2;
  int dec_blocks = 2;
  int heads = 2;
  int ffn_mult = 1;
  int n_proxy = 64;
  bool use_correction = true;
  int corr_dense = 384;
  int corr_mid = 8;
  int corr_width_a = 16;
  int corr_width_b = 24;
  int corr_stage_a = 128;
  int corr_heads = 2;
  int corr_k = 16;
  int corr_m = 4;
  int upsample = 16;
  double rho = 0.15;
  double leaky_slope = 0.2;

  // objective
  double lambda = 1.0;
  double sigma_noise = 0.05;
  int n_denoise = 16;
  int denoise_patch = 64;

  // training / evaluation
  double lr = 1e-4;
  double lr_decay_factor = 0.9;
  int lr_decay_every = 100;  // steps
  double weight_decay = 0.0;
  int steps = 500;
  int batch = 8;
  int train_shapes = 8;  // virtual dataset size cycled through by the loop
  std::uint64_t seed = 1;
  int eval_shapes = 20;
  bool include_input_in_output = true;
  int checkpoint_every = 100;
  int log_every = 10;
  std::string out_dir = "out";

  ModelConfig to_model_config() const;
  PairConfig to_pair_config() const;
  void validate() const;  // throws ConfigError
};

/// Parses `text` (line oriented, '#' comments, key=value). Unknown keys or
/// unparseable values throw ConfigError.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);  // IoError if unreadable

/// Canonical serialization: every key, fixed order, 17-digit doubles.
std::string serialize_config(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

/// FNV-1a hash of the canonical serialization, as fixed-width hex.
std::string config_hash(const RunConfig& cfg);

}  // namespace relc
