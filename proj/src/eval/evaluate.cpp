// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/eval/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ssiu/core/parallel.hpp"
#include "ssiu/data/png_io.hpp"
#include "ssiu/kernels/kernels.hpp"
#include "ssiu/model/flops.hpp"

namespace ssiu::eval {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string device_string() {
  std::ostringstream os;
  os << "cpu/" << kernels::backend_name(kernels::active_backend()) << " x" << num_threads()
     << " threads";
  return os.str();
}

std::string fmt_psnr(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

}  // namespace

Tensor<float> forward_tiled(model::SSIUModel<float>& model, const data::Image& lr, int tile,
                            int overlap) {
  SSIU_CHECK(tile >= 16, "tile size must be >= 16");
  SSIU_CHECK(overlap >= 0 && overlap < tile / 2, "tile overlap must be in [0, tile/2)");
  int s = model.config().scale;
  int H = lr.h(), W = lr.w();
  if (H <= tile && W <= tile) return model.forward(lr, nullptr);

  Tensor<float> acc = Tensor<float>::zeros(1, 3, H * s, W * s);
  Tensor<float> wsum = Tensor<float>::zeros(1, 1, H * s, W * s);
  int step = tile - overlap;
  for (int y0 = 0;; y0 += step) {
    if (y0 + tile > H) y0 = std::max(0, H - tile);
    for (int x0 = 0;; x0 += step) {
      if (x0 + tile > W) x0 = std::max(0, W - tile);
      int th = std::min(tile, H), tw = std::min(tile, W);
      data::Image patch = data::crop(lr, y0, x0, th, tw);
      Tensor<float> out = model.forward(patch, nullptr);
      // Linear feather on the overlap band.
      for (int yy = 0; yy < th * s; ++yy) {
        for (int xx = 0; xx < tw * s; ++xx) {
          double wy = 1.0, wx = 1.0;
          if (overlap > 0) {
            double band = double(overlap * s);
            if (y0 > 0 && yy < overlap * s) wy = (yy + 1) / band;
            if (y0 + th < H && yy >= th * s - overlap * s) wy = (th * s - yy) / band;
            if (x0 > 0 && xx < overlap * s) wx = (xx + 1) / band;
            if (x0 + tw < W && xx >= tw * s - overlap * s) wx = (tw * s - xx) / band;
          }
          float wgt = float(wy * wx);
          size_t oy = size_t(y0 * s + yy) * (W * s) + (x0 * s + xx);
          for (int c = 0; c < 3; ++c)
            acc.plane(0, c)[oy] += wgt * out.plane(0, c)[size_t(yy) * (tw * s) + xx];
          wsum.plane(0, 0)[oy] += wgt;
        }
      }
      if (x0 + tile >= W) break;
    }
    if (y0 + tile >= H) break;
  }
  for (int c = 0; c < 3; ++c) {
    float* p = acc.plane(0, c);
    const float* w = wsum.plane(0, 0);
    for (size_t i = 0, e = size_t(H) * s * W * s; i < e; ++i) p[i] /= std::max(w[i], 1e-8f);
  }
  return acc;
}

MetricsReport evaluate(model::SSIUModel<float>& model, const data::DatasetManifest& dataset,
                       int scale, const EvalOptions& opts) {
  SSIU_CHECK(model.config().scale == scale,
             "model scale " << model.config().scale << " does not match requested " << scale);
  MetricsReport r;
  r.dataset = dataset.split;
  r.scale = scale;
  r.device = device_string();
  r.param_count = model.parameter_count();
  r.flops_1280x720 = model::estimate_flops(model.config(), 720, 1280).total;
  r.tiled = opts.tile > 0;
  if (!opts.comparison_dir.empty()) fs::create_directories(opts.comparison_dir);

  double psnr_acc = 0.0, ssim_acc = 0.0, ms_acc = 0.0;
  int finite_psnr = 0;
  for (const auto& e : dataset.entries) {
    data::SRPair pair = data::load_pair(e, scale);
    auto t0 = Clock::now();
    Tensor<float> pred = opts.tile > 0 ? forward_tiled(model, pair.lr, opts.tile, opts.tile_overlap)
                                       : model.forward(pair.lr, nullptr);
    double ms = ms_since(t0);
    data::clamp01(pred);
    ImageResult ir;
    ir.name = e.name;
    ir.psnr = psnr_y(pred, pair.hr, scale);
    ir.ssim = ssim_y(pred, pair.hr, scale);
    ir.ms = ms;
    r.per_image.push_back(ir);
    if (std::isfinite(ir.psnr)) {
      psnr_acc += ir.psnr;
      ++finite_psnr;
    }
    ssim_acc += ir.ssim;
    ms_acc += ms;

    if (!opts.comparison_dir.empty()) {
      data::Image bic = data::bicubic_resize(pair.lr, pair.hr.h(), pair.hr.w());
      data::clamp01(bic);
      int H = pair.hr.h(), W = pair.hr.w();
      data::Image trip(1, 3, H, W * 3);
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < H; ++y) {
          float* row = trip.plane(0, c) + size_t(y) * (W * 3);
          std::copy_n(bic.plane(0, c) + size_t(y) * W, W, row);
          std::copy_n(pred.plane(0, c) + size_t(y) * W, W, row + W);
          std::copy_n(pair.hr.plane(0, c) + size_t(y) * W, W, row + 2 * W);
        }
      data::write_png(trip, (fs::path(opts.comparison_dir) / (e.name + "_cmp.png")).string());
    }
  }
  size_t n = r.per_image.size();
  r.mean_psnr = finite_psnr ? psnr_acc / finite_psnr : std::numeric_limits<double>::infinity();
  r.mean_ssim = n ? ssim_acc / double(n) : 0.0;
  r.mean_ms = n ? ms_acc / double(n) : 0.0;
  return r;
}

std::string MetricsReport::table() const {
  std::ostringstream os;
  os << "dataset: " << dataset << "  scale: x" << scale << "  device: " << device
     << (tiled ? "  [tiled]" : "") << "\n";
  os << "params: " << param_count << "  flops@1280x720: " << flops_1280x720 << "\n";
  os << std::left << std::setw(24) << "image" << std::right << std::setw(10) << "psnr"
     << std::setw(10) << "ssim" << std::setw(12) << "ms" << "\n";
  for (const auto& ir : per_image) {
    os << std::left << std::setw(24) << ir.name << std::right << std::setw(10) << fmt_psnr(ir.psnr)
       << std::setw(10) << std::fixed << std::setprecision(4) << ir.ssim << std::setw(12)
       << std::setprecision(1) << ir.ms << "\n";
  }
  os << std::left << std::setw(24) << "mean" << std::right << std::setw(10) << fmt_psnr(mean_psnr)
     << std::setw(10) << std::fixed << std::setprecision(4) << mean_ssim << std::setw(12)
     << std::setprecision(1) << mean_ms << "\n";
  return os.str();
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["dataset"] = dataset;
  j["scale"] = scale;
  j["device"] = device;
  j["tiled"] = tiled;
  j["param_count"] = param_count;
  j["flops_1280x720"] = flops_1280x720;
  j["mean_psnr"] = std::isinf(mean_psnr) ? 1e9 : mean_psnr;
  j["mean_ssim"] = mean_ssim;
  j["mean_ms"] = mean_ms;
  j["per_image"] = nlohmann::json::array();
  for (const auto& ir : per_image) {
    nlohmann::json e;
    e["name"] = ir.name;
    e["psnr"] = std::isinf(ir.psnr) ? 1e9 : ir.psnr;
    e["ssim"] = ir.ssim;
    e["ms"] = ir.ms;
    j["per_image"].push_back(e);
  }
  return j;
}

TimingReport time_inference(model::SSIUModel<float>& model, int h, int w, int n_runs) {
  SSIU_CHECK(n_runs >= 1, "n_runs must be >= 1");
  Rng rng(12345);
  Tensor<float> input(1, 3, h, w);
  for (size_t i = 0; i < input.numel(); ++i) input.data()[i] = float(rng.uniform());
  (void)model.forward(input, nullptr);  // warmup

  TimingReport r;
  r.n_runs = n_runs;
  std::vector<double> times;
  times.reserve(n_runs);
  for (int i = 0; i < n_runs; ++i) {
    auto t0 = Clock::now();
    (void)model.forward(input, nullptr);
    times.push_back(ms_since(t0));
  }
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= n_runs;
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  r.mean_ms = mean;
  r.std_ms = n_runs > 1 ? std::sqrt(var / (n_runs - 1)) : 0.0;

  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream is(line.substr(6));
      is >> r.peak_rss_kb;
      break;
    }
  }
  return r;
}

}  // namespace ssiu::eval
