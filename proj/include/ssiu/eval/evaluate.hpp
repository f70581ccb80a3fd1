// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssiu/data/dataset.hpp"
#include "ssiu/eval/metrics.hpp"
#include "ssiu/model/model.hpp"

namespace ssiu::eval {

struct ImageResult {
  std::string name;
  double psnr = 0.0;  // +inf reported as such
  double ssim = 0.0;
  double ms = 0.0;
};

struct MetricsReport {
  std::vector<ImageResult> per_image;
  double mean_psnr = 0.0;  // over finite entries
  double mean_ssim = 0.0;
  std::string dataset;
  int scale = 0;
  std::string device;      // substrate + kernel backend + threads
  double mean_ms = 0.0;
  size_t param_count = 0;
  int64_t flops_1280x720 = 0;
  bool tiled = false;

  std::string table() const;        // human-readable
  nlohmann::json to_json() const;   // machine-readable
};

struct EvalOptions {
  int tile = 0;          // 0 = whole-image inference
  int tile_overlap = 8;  // LR pixels, blended linearly
  std::string comparison_dir;  // when set, writes bicubic|model|HR triptychs
};

// Forward every LR image (whole image by default), clamp to [0,1], compute
// Y-channel PSNR/SSIM with shave = scale, record wall time per image.
MetricsReport evaluate(model::SSIUModel<float>& model, const data::DatasetManifest& dataset,
                       int scale, const EvalOptions& opts = {});

// Tiled forward with linear overlap blending, for memory-constrained runs.
Tensor<float> forward_tiled(model::SSIUModel<float>& model, const data::Image& lr, int tile,
                            int overlap);

struct TimingReport {
  double mean_ms = 0.0;
  double std_ms = 0.0;
  int n_runs = 0;
  size_t peak_rss_kb = 0;  // process high-water mark, as exposed by the OS
};

TimingReport time_inference(model::SSIUModel<float>& model, int h, int w, int n_runs);

}  // namespace ssiu::eval
