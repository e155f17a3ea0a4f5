// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Training, evaluation and completion drivers. Every piece of randomness is
// derived statelessly from (base seed, step, item), so an interrupted run
// resumed from a checkpoint replays the exact remaining step sequence and
// lands bitwise-identical to an uninterrupted run.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "relc/checkpoint.hpp"
#include "relc/config.hpp"
#include "relc/losses.hpp"
#include "relc/model.hpp"

namespace relc {

struct StepLog {
  int step = 0;  // 1-based, after the update
  double j0 = 0.0, j1 = 0.0, j_denoise = 0.0, total = 0.0;
  double lr = 0.0;
  double ema = 0.0;
};

struct TrainResult {
  TrainMeta meta;
  std::string ckpt_path;
  std::vector<StepLog> logs;  // one entry per step
};

/// Seeds `store` (must be empty) exactly as a fresh `train` run would.
void init_param_store(const RunConfig& cfg, ParamStore& store);

/// The exact (partial, gt) pair the training loop draws for `shape_idx`.
std::pair<PointCloud, PointCloud> train_pair(const RunConfig& cfg, int shape_idx);

/// Trains per the config. `resume_path` (may be empty) loads parameters,
/// moments and step counter and continues; its config hash must match.
/// `on_step` (may be null) observes every step after the update.
TrainResult train(const RunConfig& cfg, const std::string& resume_path = {},
                  const std::function<void(const StepLog&)>& on_step = nullptr);

struct EvalResult {
  int shapes = 0;
  double cd_l1 = 0.0;
  double cd_l2 = 0.0;
  double fscore = 0.0;
  double fidelity = 0.0;
  double mmd = 0.0;
  int pred_points = 0;
  int gt_points = 0;
};

/// Held-out seeded evaluation of a trained parameter store.
EvalResult evaluate(const RunConfig& cfg, const ParamStore& store);

/// Key=value report (one metric per line) plus run identity fields.
std::string eval_report_text(const RunConfig& cfg, const EvalResult& r);
/// The same content as a JSON object string.
std::string eval_report_json(const RunConfig& cfg, const EvalResult& r);

struct CompleteResult {
  PointCloud input;       // as read (original frame)
  PointCloud prediction;  // completed cloud (original frame)
};

/// Completes an arbitrary input cloud with a trained store: normalizes,
/// resamples/pads to the configured input count, runs the model, merges the
/// observed points per config, and maps back into the input frame.
CompleteResult complete_cloud(const RunConfig& cfg, const ParamStore& store,
                              const PointCloud& input);

/// Evaluation-time prediction for one normalized partial cloud (dense output
/// plus, per config, the observed input merged in).
PointCloud predict_cloud(const RunConfig& cfg, const CompletionModel& model,
                         const ParamStore& store, const PointCloud& partial, std::uint64_t seed);

}  // namespace relc
