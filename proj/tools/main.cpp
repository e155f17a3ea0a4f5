// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Command line entry point: train / eval / complete / selftest.
// Exit codes: 0 ok, 1 unexpected error, 2 invalid config, 3 diverged
// training, 4 I/O or data error.
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "relc/checkpoint.hpp"
#include "relc/cloud_io.hpp"
#include "relc/config.hpp"
#include "relc/error.hpp"
#include "relc/selfcheck.hpp"
#include "relc/svg.hpp"
#include "relc/trainer.hpp"

namespace {

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& resume) {
  relc::RunConfig cfg = relc::load_config(config_path);
  if (seed) cfg.seed = *seed;
  std::printf("training: steps=%d batch=%d seed=%llu config_hash=%s\n", cfg.steps, cfg.batch,
              static_cast<unsigned long long>(cfg.seed), relc::config_hash(cfg).c_str());
  relc::TrainResult result = relc::train(cfg, resume, [&](const relc::StepLog& log) {
    if (log.step % cfg.log_every == 0 || log.step == cfg.steps)
      std::printf("step=%d total=%.6f j0=%.6f j1=%.6f j_denoise=%.6f lr=%.8f ema=%.6f\n",
                  log.step, log.total, log.j0, log.j1, log.j_denoise, log.lr, log.ema);
  });
  std::printf("checkpoint=%s step=%lld\n", result.ckpt_path.c_str(),
              static_cast<long long>(result.meta.step));
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& config_path, const std::string& out) {
  relc::RunConfig cfg = relc::load_config(config_path);
  relc::ParamStore store;
  relc::TrainMeta meta = relc::load_checkpoint(ckpt, store);
  if (meta.config_hash != relc::config_hash(cfg))
    throw relc::ConfigError("eval: checkpoint config hash does not match --config");
  relc::EvalResult r = relc::evaluate(cfg, store);
  const std::string text = relc::eval_report_text(cfg, r);
  {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw relc::IoError("cannot write report: " + out);
    f << text;
  }
  {
    std::ofstream f(out + ".json", std::ios::trunc);
    if (!f) throw relc::IoError("cannot write report: " + out + ".json");
    f << relc::eval_report_json(cfg, r);
  }
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_complete(const std::string& ckpt, const std::string& config_path, const std::string& in,
                 const std::string& out, const std::string& svg_prefix) {
  relc::RunConfig cfg = relc::load_config(config_path);
  relc::ParamStore store;
  relc::TrainMeta meta = relc::load_checkpoint(ckpt, store);
  if (meta.config_hash != relc::config_hash(cfg))
    throw relc::ConfigError("complete: checkpoint config hash does not match --config");
  relc::PointCloud input = relc::read_cloud(in);
  relc::CompleteResult result = relc::complete_cloud(cfg, store, input);
  relc::write_ply(result.prediction, out);
  std::printf("completed %d -> %d points, wrote %s\n", input.count(),
              result.prediction.count(), out.c_str());
  if (!svg_prefix.empty()) {
    relc::write_cloud_svg(svg_prefix + "_input.svg", {{&result.input, "#1f77b4", 0.8}});
    relc::write_cloud_svg(svg_prefix + "_prediction.svg",
                          {{&result.prediction, "#d62728", 0.8}});
    relc::write_cloud_svg(svg_prefix + "_overlay.svg",
                          {{&result.prediction, "#d62728", 0.55},
                           {&result.input, "#1f77b4", 0.8}});
    std::printf("wrote %s_{input,prediction,overlay}.svg\n", svg_prefix.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relcomplete: relation-aware point cloud completion"};
  app.require_subcommand(1);

  std::string config_path, resume, ckpt, in_path, out_path, svg_prefix;
  std::optional<std::uint64_t> seed;

  CLI::App* train = app.add_subcommand("train", "train a model from a config");
  train->add_option("--config", config_path, "run config file")->required();
  train->add_option("--seed", seed, "override the config seed");
  train->add_option("--resume", resume, "checkpoint to continue from");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--ckpt", ckpt, "checkpoint file")->required();
  eval->add_option("--config", config_path, "run config file")->required();
  eval->add_option("--out", out_path, "report output path")->required();

  CLI::App* complete = app.add_subcommand("complete", "complete a partial cloud");
  complete->add_option("--ckpt", ckpt, "checkpoint file")->required();
  complete->add_option("--config", config_path, "run config file")->required();
  complete->add_option("--in", in_path, "input cloud (.xyz or .ply)")->required();
  complete->add_option("--out", out_path, "output cloud (.ply)")->required();
  complete->add_option("--svg", svg_prefix, "also write <prefix>_{input,prediction,overlay}.svg");

  CLI::App* selftest = app.add_subcommand("selftest", "run oracle + gradient suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, seed, resume);
    if (eval->parsed()) return cmd_eval(ckpt, config_path, out_path);
    if (complete->parsed()) return cmd_complete(ckpt, config_path, in_path, out_path, svg_prefix);
    if (selftest->parsed()) return relc::run_selftest() ? 0 : 1;
  } catch (const relc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const relc::DivergedError& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return 3;
  } catch (const relc::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const relc::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
