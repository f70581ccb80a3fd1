// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/cli/commands.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "ssiu/cli/run_config.hpp"
#include "ssiu/data/png_io.hpp"
#include "ssiu/eval/evaluate.hpp"
#include "ssiu/hqs/hqs.hpp"
#include "ssiu/model/checkpoint.hpp"
#include "ssiu/model/flops.hpp"
#include "ssiu/train/trainer.hpp"

namespace ssiu::cli {

namespace fs = std::filesystem;

bool check_device(std::ostream& err) {
  const char* dev = std::getenv("SSIU_DEVICE");
  if (dev && std::strcmp(dev, "cpu") != 0) {
    err << "error: SSIU_DEVICE=" << dev << " is not supported; this build runs on cpu only\n";
    return false;
  }
  return true;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              bool deterministic, std::ostream& out, std::ostream& err) {
  try {
    if (!check_device(err)) return 2;
    RunConfig cfg = RunConfig::load(config_path, overrides);
    if (deterministic) cfg.train.num_workers = 0;
    if (cfg.data.root.empty()) {
      err << "error: config field 'data.root' is required for training\n";
      return 2;
    }
    fs::create_directories(cfg.output_dir);
    std::ofstream((fs::path(cfg.output_dir) / "config.json").string())
        << cfg.to_json().dump(2) << "\n";

    data::DatasetManifest train_set = data::load_manifest(
        cfg.data.root, cfg.data.train_split, cfg.model.scale, cfg.data.regenerate_lr_cache);
    std::optional<data::DatasetManifest> val_set;
    if (!cfg.data.val_split.empty())
      val_set = data::load_manifest(cfg.data.root, cfg.data.val_split, cfg.model.scale,
                                    cfg.data.regenerate_lr_cache);

    auto m = model::build_model<float>(cfg.model, cfg.seed);
    out << "training: " << m.parameter_count() << " params, " << cfg.train.total_iters
        << " iters, batch " << cfg.train.batch_size << ", " << train_set.entries.size()
        << " images\n";
    train::TrainResult res = train::train(m, train_set, val_set, cfg.train, cfg.output_dir);
    out << "final checkpoint: " << res.final_checkpoint << "\n";
    if (val_set) out << "final validation psnr: " << res.final_val_psnr << " dB\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_root,
             const std::string& split, int scale, const std::string& report_dir, int tile,
             std::ostream& out, std::ostream& err) {
  try {
    if (!check_device(err)) return 2;
    auto m = model::load_checkpoint(checkpoint_path);
    if (m.config().scale != scale) {
      err << "error: checkpoint is a x" << m.config().scale
          << " model but --scale=" << scale << " was requested\n";
      return 2;
    }
    data::DatasetManifest ds = data::load_manifest(dataset_root, split, scale);
    eval::EvalOptions opts;
    opts.tile = tile;
    eval::MetricsReport rep = eval::evaluate(m, ds, scale, opts);
    out << rep.table();
    fs::path dir = report_dir.empty() ? fs::path(".") : fs::path(report_dir);
    fs::create_directories(dir / "reports");
    std::string stem = "eval_" + split + "_x" + std::to_string(scale);
    std::ofstream((dir / "reports" / (stem + ".txt")).string()) << rep.table();
    std::ofstream jf((dir / "reports" / (stem + ".jsonl")).string());
    for (const auto& ir : rep.per_image) {
      nlohmann::json line = {{"name", ir.name},
                             {"psnr", std::isinf(ir.psnr) ? 1e9 : ir.psnr},
                             {"ssim", ir.ssim},
                             {"ms", ir.ms}};
      jf << line.dump() << "\n";
    }
    jf << rep.to_json().dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_infer(const std::string& checkpoint_path, const std::string& input_path,
              const std::string& output_path, std::ostream& out, std::ostream& err) {
  try {
    if (!check_device(err)) return 2;
    auto m = model::load_checkpoint(checkpoint_path);
    bool was_gray = false;
    data::Image input = data::read_png(input_path, &was_gray);
    if (was_gray)
      err << "warning: grayscale input " << input_path << " converted to 3 channels\n";
    Tensor<float> pred = m.forward(input, nullptr);
    data::clamp01(pred);
    data::write_png(pred, output_path);
    out << "wrote " << output_path << " (" << pred.w() << "x" << pred.h() << ")\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_oracle_check(uint64_t seed, int n_instances, double tolerance, std::ostream& out,
                     std::ostream& err) {
  try {
    auto results = hqs::run_oracle_suite(seed, n_instances, tolerance);
    out << std::left << std::setw(8) << "inst" << std::setw(6) << "dim" << std::setw(8) << "iters"
        << std::setw(14) << "linf_vs_cd" << std::setw(14) << "objective" << "status\n";
    int failures = 0;
    for (size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      out << std::left << std::setw(8) << i << std::setw(6) << r.dim << std::setw(8)
          << r.iterations << std::setw(14) << std::scientific << std::setprecision(3)
          << r.linf_diff << std::setw(14) << std::setprecision(5) << r.final_objective
          << (r.passed ? "pass" : "FAIL") << "\n";
      if (!r.passed) {
        ++failures;
        err << "instance " << i << " failed (seed " << r.seed << ", linf " << r.linf_diff
            << ", tolerance " << tolerance << ")\n";
      }
    }
    out << results.size() << " instances, " << failures << " failures\n";
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_flops(const std::string& config_path, int out_h, int out_w, std::ostream& out,
              std::ostream& err) {
  try {
    std::ifstream f(config_path);
    if (!f) throw io_error("cannot open config file: " + config_path);
    nlohmann::json j = nlohmann::json::parse(f);
    // Accept both a full run config and a bare model config.
    model::SSIUConfig cfg = j.contains("model") ? model::SSIUConfig::from_json(j.at("model"))
                                                : model::SSIUConfig::from_json(j);
    auto m = model::SSIUModel<float>(cfg);
    model::FlopsReport rep = model::estimate_flops(cfg, out_h, out_w);
    out << "parameters: " << m.parameter_count() << "\n";
    out << "flops @ " << out_w << "x" << out_h << " output: " << rep.total << "\n";
    out << "  conv: " << rep.conv << "\n";
    out << "  attention matmuls: " << rep.attention_matmul << "\n";
    out << "  attention submodule total: " << rep.attention_module << "\n";
    out << "  layer norm: " << rep.norm << "\n";
    out << "  elementwise: " << rep.elementwise << "\n";
    out << "note: " << rep.note << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ssiu::cli
