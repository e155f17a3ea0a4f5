// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint persistence. One self-contained binary file:
//
//   magic "RELCKPT1"
//   u32 tensor count
//   per tensor: u32 name length, name bytes, u32 rank, u32 dims[rank],
//               values as little-endian IEEE-754 doubles
//   u32 manifest length, manifest bytes (plain "key=value\n" text)
//   u64 FNV-1a checksum of everything before it
//
// Parameter values are stored under their registered names; Adam moments
// ride along as "adam.m.<name>" / "adam.v.<name>" tensors. Writes go to a
// temp file in the same directory and are renamed into place, so a killed
// process never leaves a checkpoint that both exists and loads.
#pragma once

#include <cstdint>
#include <string>

#include "relc/nn.hpp"

namespace relc {

struct TrainMeta {
  std::int64_t step = 0;
  double loss_ema = 0.0;
  std::uint64_t seed = 0;
  std::string init_scheme = "kaiming_uniform_fan_in";
  std::string config_hash;
};

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len);

std::string manifest_text(const TrainMeta& meta);

void save_checkpoint(const std::string& path, const ParamStore& store, const TrainMeta& meta);

/// Fills a fresh store (must be empty) and returns the manifest.
/// Throws IoError on missing file, bad magic, truncation, or checksum
/// mismatch; the store is only modified after the file fully validates.
TrainMeta load_checkpoint(const std::string& path, ParamStore& store);

}  // namespace relc
