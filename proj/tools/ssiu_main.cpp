// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <iostream>

#include "ssiu/cli/commands.hpp"
#include "ssiu/core/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ssiu: structural-similarity-inspired unfolding super-resolution"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: hardware concurrency)");

  // train
  auto* train = app.add_subcommand("train", "train a model from a run config");
  std::string train_config;
  std::vector<std::string> overrides;
  bool deterministic = false;
  train->add_option("--config", train_config, "run config JSON")->required();
  train->add_option("--set", overrides, "dotted-path override, e.g. train.lambda_f=0");
  train->add_flag("--deterministic", deterministic, "disable parallel data loading");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a benchmark split");
  std::string ckpt, data_root, split = "test", report_dir;
  int scale = 0, tile = 0;
  ev->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  ev->add_option("--dataset", data_root, "dataset root directory")->required();
  ev->add_option("--split", split, "split name (default: test)");
  ev->add_option("--scale", scale, "upscaling factor")->required();
  ev->add_option("--out", report_dir, "report directory (default: cwd)");
  ev->add_option("--tile", tile, "tile size for tiled inference (0 = whole image)");

  // infer
  auto* inf = app.add_subcommand("infer", "super-resolve one PNG");
  std::string infer_ckpt, in_png, out_png;
  inf->add_option("--checkpoint", infer_ckpt, "checkpoint file")->required();
  inf->add_option("--input", in_png, "input PNG")->required();
  inf->add_option("--output", out_png, "output PNG")->required();

  // oracle-check
  auto* oc = app.add_subcommand("oracle-check", "run the classical-solver verification suite");
  uint64_t seed = 1234;
  int instances = 20;
  double tolerance = 1e-4;
  oc->add_option("--seed", seed, "suite seed (default 1234)");
  oc->add_option("--instances", instances, "number of instances (default 20)");
  oc->add_option("--tolerance", tolerance, "agreement tolerance (default 1e-4)");

  // flops
  auto* fl = app.add_subcommand("flops", "parameter count and FLOP estimate for a config");
  std::string flops_config;
  int out_h = 720, out_w = 1280;
  fl->add_option("--config", flops_config, "run or model config JSON")->required();
  fl->add_option("--out-h", out_h, "output height (default 720)");
  fl->add_option("--out-w", out_w, "output width (default 1280)");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) ssiu::set_num_threads(threads);

  if (*train)
    return ssiu::cli::cmd_train(train_config, overrides, deterministic, std::cout, std::cerr);
  if (*ev)
    return ssiu::cli::cmd_eval(ckpt, data_root, split, scale, report_dir, tile, std::cout,
                               std::cerr);
  if (*inf) return ssiu::cli::cmd_infer(infer_ckpt, in_png, out_png, std::cout, std::cerr);
  if (*oc) return ssiu::cli::cmd_oracle_check(seed, instances, tolerance, std::cout, std::cerr);
  if (*fl) return ssiu::cli::cmd_flops(flops_config, out_h, out_w, std::cout, std::cerr);
  return 1;
}
