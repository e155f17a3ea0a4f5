// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "json.hpp"

#include "relc/error.hpp"
#include "relc/rng.hpp"

namespace relc {

namespace {

// Fixed tags keep the seed streams of unrelated stages disjoint.
constexpr std::uint64_t kTagInit = 0xA111;
constexpr std::uint64_t kTagData = 0xDA7A;
constexpr std::uint64_t kTagDenoise = 0xDE01;
constexpr std::uint64_t kTagForward = 0xF0ED;

double lr_at(const RunConfig& cfg, int step) {  // step 0-based
  const int decays = step / cfg.lr_decay_every;
  return cfg.lr * std::pow(cfg.lr_decay_factor, decays);
}

}  // namespace

void init_param_store(const RunConfig& cfg, ParamStore& store) {
  CompletionModel model(cfg.to_model_config());
  Rng init_rng(mix_seed(cfg.seed, kTagInit));
  model.register_params(store, init_rng);
}

std::pair<PointCloud, PointCloud> train_pair(const RunConfig& cfg, int shape_idx) {
  return make_pair(cfg.to_pair_config(), mix_seed(cfg.seed, kTagData, shape_idx));
}

TrainResult train(const RunConfig& cfg, const std::string& resume_path,
                  const std::function<void(const StepLog&)>& on_step) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed;
  CompletionModel model(cfg.to_model_config());

  ParamStore store;
  TrainMeta meta;
  meta.seed = seed;
  meta.config_hash = config_hash(cfg);
  if (resume_path.empty()) {
    init_param_store(cfg, store);
  } else {
    meta = load_checkpoint(resume_path, store);
    if (meta.config_hash != config_hash(cfg))
      throw ConfigError("resume: checkpoint was trained with a different config");
  }

  std::filesystem::create_directories(cfg.out_dir);
  const std::string ckpt_path = cfg.out_dir + "/model.ckpt";

  TrainResult result;
  const PairConfig pair_cfg = cfg.to_pair_config();
  for (int s = static_cast<int>(meta.step); s < cfg.steps; ++s) {
    GradMap grads;
    double j0 = 0.0, j1 = 0.0, jd = 0.0, total = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const std::uint64_t item = static_cast<std::uint64_t>(s) * cfg.batch + b;
      const int shape_idx = static_cast<int>(item % static_cast<std::uint64_t>(cfg.train_shapes));
      auto [partial, gt] = make_pair(pair_cfg, mix_seed(seed, kTagData, shape_idx));
      DenoiseBatch denoise = build_denoise_batch(gt, cfg.n_denoise, cfg.sigma_noise,
                                                 cfg.denoise_patch, mix_seed(seed, kTagDenoise,
                                                                             item));
      Tape tape;
      ParamContext ctx(tape, store);
      const PointCloud* noisy = cfg.n_denoise > 0 ? &denoise.noisy : nullptr;
      ModelOutput out = model.forward(tape, ctx, partial, mix_seed(seed, kTagForward, item),
                                      noisy);
      LossBreakdown loss = loss_total(tape, out.proxies.coords, out.dense_points, gt,
                                      out.denoise_points, denoise.patches, cfg.lambda);
      if (!std::isfinite(loss.total)) throw DivergedError("non-finite loss at step " +
                                                          std::to_string(s));
      tape.backward(loss.node);
      ctx.add_grads(grads);
      j0 += loss.j0;
      j1 += loss.j1;
      jd += loss.j_denoise;
      total += loss.total;
    }
    const double inv_b = 1.0 / cfg.batch;
    for (auto& [name, g] : grads)
      for (auto& v : g) v *= inv_b;

    AdamConfig adam;
    adam.lr = lr_at(cfg, s);
    adam.weight_decay = cfg.weight_decay;
    adamw_step(store, grads, adam, s + 1);

    StepLog log;
    log.step = s + 1;
    log.j0 = j0 * inv_b;
    log.j1 = j1 * inv_b;
    log.j_denoise = jd * inv_b;
    log.total = total * inv_b;
    log.lr = adam.lr;
    meta.loss_ema = s == 0 ? log.total : 0.9 * meta.loss_ema + 0.1 * log.total;
    log.ema = meta.loss_ema;
    meta.step = s + 1;
    result.logs.push_back(log);
    if (on_step) on_step(log);

    if ((s + 1) % cfg.checkpoint_every == 0) save_checkpoint(ckpt_path, store, meta);
  }
  save_checkpoint(ckpt_path, store, meta);
  result.meta = meta;
  result.ckpt_path = ckpt_path;
  return result;
}

PointCloud predict_cloud(const RunConfig& cfg, const CompletionModel& model,
                         const ParamStore& store, const PointCloud& partial,
                         std::uint64_t seed) {
  Tape tape;
  ParamContext ctx(tape, store, /*trainable=*/false);
  ModelOutput out = model.forward(tape, ctx, partial, seed);
  PointCloud pred = out.dense_host;
  if (cfg.include_input_in_output)
    for (const auto& p : partial.points()) pred.add(p);
  return pred;
}

EvalResult evaluate(const RunConfig& cfg, const ParamStore& store) {
  cfg.validate();
  CompletionModel model(cfg.to_model_config());
  const PairConfig pair_cfg = cfg.to_pair_config();
  EvalResult r;
  r.shapes = cfg.eval_shapes;
  for (int e = 0; e < cfg.eval_shapes; ++e) {
    auto [partial, gt] = make_pair(pair_cfg, mix_seed(cfg.seed, 0xE7A1, e));
    PointCloud pred = predict_cloud(cfg, model, store, partial, mix_seed(cfg.seed, 0xE7F0, e));
    r.cd_l1 += chamfer_l1(pred, gt);
    r.cd_l2 += chamfer_l2(pred, gt);
    r.fscore += f_score(pred, gt, 0.01);
    r.fidelity += fidelity(partial, pred);
    r.mmd += mmd(pred, {gt});
    r.pred_points = pred.count();
    r.gt_points = gt.count();
  }
  r.cd_l1 /= cfg.eval_shapes;
  r.cd_l2 /= cfg.eval_shapes;
  r.fscore /= cfg.eval_shapes;
  r.fidelity /= cfg.eval_shapes;
  r.mmd /= cfg.eval_shapes;
  return r;
}

std::string eval_report_text(const RunConfig& cfg, const EvalResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "config_hash=" << config_hash(cfg) << "\n";
  os << "seed=" << cfg.seed << "\n";
  os << "shapes=" << r.shapes << "\n";
  os << "pred_points=" << r.pred_points << "\n";
  os << "gt_points=" << r.gt_points << "\n";
  os << "fscore_threshold_fraction=" << 0.01 << "\n";
  os << "cd_l1=" << r.cd_l1 << "\n";
  os << "cd_l2=" << r.cd_l2 << "\n";
  os << "fscore=" << r.fscore << "\n";
  os << "fidelity=" << r.fidelity << "\n";
  os << "mmd=" << r.mmd << "\n";
  return os.str();
}

std::string eval_report_json(const RunConfig& cfg, const EvalResult& r) {
  nlohmann::json j;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["shapes"] = r.shapes;
  j["cloud_sizes"] = {{"prediction", r.pred_points}, {"ground_truth", r.gt_points}};
  j["fscore_threshold_fraction"] = 0.01;
  j["metrics"] = {{"cd_l1", r.cd_l1},
                  {"cd_l2", r.cd_l2},
                  {"fscore", r.fscore},
                  {"fidelity", r.fidelity},
                  {"mmd", r.mmd}};
  return j.dump(2) + "\n";
}

CompleteResult complete_cloud(const RunConfig& cfg, const ParamStore& store,
                              const PointCloud& input) {
  if (input.empty()) throw DataError("complete: empty input cloud");
  CompletionModel model(cfg.to_model_config());

  NormalizeResult norm = normalize_unit_sphere(input);
  PointCloud partial;
  if (norm.cloud.count() >= cfg.n_input) {
    partial = norm.cloud.select(
        farthest_point_sample(norm.cloud, cfg.n_input, mix_seed(cfg.seed, 0xC0A1)));
  } else {
    partial = norm.cloud;
    Rng pad(mix_seed(cfg.seed, 0xC0AD));
    while (partial.count() < cfg.n_input) {
      const Vec3& base = norm.cloud[uniform_index(pad, norm.cloud.count())];
      partial.add(base + Vec3{1e-3 * gaussian(pad), 1e-3 * gaussian(pad), 1e-3 * gaussian(pad)});
    }
  }

  PointCloud pred = predict_cloud(cfg, model, store, partial, mix_seed(cfg.seed, 0xC0F0));
  CompleteResult out;
  out.input = input;
  out.prediction = denormalize(pred, norm.centroid, norm.scale);
  return out;
}

}  // namespace relc
