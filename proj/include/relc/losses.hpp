// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Training objectives and evaluation metrics. Host-side (plain double)
// metric functions use exact brute-force nearest-neighbor search; the
// differentiable Chamfer path records gather/sub/sqrt chains on the tape
// with the discrete matching held fixed (ties to the smaller index).
#pragma once

#include <cstdint>
#include <vector>

#include "relc/geometry.hpp"
#include "relc/tensor.hpp"

namespace relc {

double chamfer_l1(const PointCloud& a, const PointCloud& b);
double chamfer_l2(const PointCloud& a, const PointCloud& b);

/// Diameter of the bounding sphere centered on the centroid (2 x max
/// distance from centroid). Used to normalize the F-Score threshold.
double bounding_sphere_diameter(const PointCloud& c);

/// threshold = threshold_fraction x bounding_sphere_diameter(gt).
double f_score(const PointCloud& pred, const PointCloud& gt, double threshold_fraction = 0.01);

/// Mean distance from each input point to its nearest predicted point.
double fidelity(const PointCloud& input, const PointCloud& pred);

/// Minimum over references of chamfer_l2(pred, ref).
double mmd(const PointCloud& pred, const std::vector<PointCloud>& refs);

/// CD-l1 with `pred` on the tape and `target` constant: gradient flows into
/// the predicted coordinates only.
Tensor chamfer_l1_diff(Tape& tape, Tensor pred, const PointCloud& target);

struct DenoiseBatch {
  PointCloud clean;                 // centers sampled from the ground truth
  PointCloud noisy;                 // clean + sigma * gaussian noise
  std::vector<PointCloud> patches;  // per query: patch_size nearest gt points
};

DenoiseBatch build_denoise_batch(const PointCloud& gt, int n_queries, double sigma,
                                 int patch_size, std::uint64_t seed);

struct LossBreakdown {
  double j0 = 0.0;         // sparse Chamfer: proxies vs gt
  double j1 = 0.0;         // dense Chamfer: rebuilt cloud vs gt
  double j_denoise = 0.0;  // mean patch Chamfer over denoise queries
  double lambda = 0.0;
  double total = 0.0;      // j0 + j1 + lambda * j_denoise
  bool denoise_empty = false;
  Tensor node;             // scalar tape node carrying the same total
};

/// denoise_points holds the rebuilt patches back to back (patch i at rows
/// [i*u, (i+1)*u) with u = rows / patches.size()); pass an invalid Tensor
/// and empty patches to skip the denoising term.
LossBreakdown loss_total(Tape& tape, Tensor proxy_coords, Tensor dense_points,
                         const PointCloud& gt, Tensor denoise_points,
                         const std::vector<PointCloud>& patches, double lambda);

}  // namespace relc
