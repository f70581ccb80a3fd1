// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ssiu/data/png_io.hpp"

namespace ssiu::data {

namespace fs = std::filesystem;

namespace {

// Keys cubic kernel, a = -0.5.
inline double cubic(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

struct CubicTap {
  int idx[4];
  double w[4];
};

void make_cubic_taps(int in_size, int out_size, std::vector<CubicTap>& taps) {
  taps.resize(out_size);
  double scale = double(in_size) / double(out_size);
  for (int o = 0; o < out_size; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    int base = int(std::floor(src)) - 1;
    for (int t = 0; t < 4; ++t) {
      int i = base + t;
      taps[o].w[t] = cubic(src - double(i));
      taps[o].idx[t] = std::clamp(i, 0, in_size - 1);
    }
  }
}

}  // namespace

Image bicubic_resize(const Image& img, int out_h, int out_w) {
  SSIU_CHECK(out_h >= 1 && out_w >= 1, "bicubic output size must be >= 1");
  int N = img.n(), C = img.c(), H = img.h(), W = img.w();
  std::vector<CubicTap> tx, ty;
  make_cubic_taps(W, out_w, tx);
  make_cubic_taps(H, out_h, ty);

  // Horizontal pass, then vertical, in double for headroom.
  std::vector<double> mid(size_t(H) * out_w);
  Image out(N, C, out_h, out_w);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const float* src = img.plane(n, c);
      for (int y = 0; y < H; ++y) {
        const float* row = src + size_t(y) * W;
        double* mrow = mid.data() + size_t(y) * out_w;
        for (int x = 0; x < out_w; ++x) {
          const CubicTap& t = tx[x];
          mrow[x] = t.w[0] * row[t.idx[0]] + t.w[1] * row[t.idx[1]] + t.w[2] * row[t.idx[2]] +
                    t.w[3] * row[t.idx[3]];
        }
      }
      float* dst = out.plane(n, c);
      for (int y = 0; y < out_h; ++y) {
        const CubicTap& t = ty[y];
        const double* r0 = mid.data() + size_t(t.idx[0]) * out_w;
        const double* r1 = mid.data() + size_t(t.idx[1]) * out_w;
        const double* r2 = mid.data() + size_t(t.idx[2]) * out_w;
        const double* r3 = mid.data() + size_t(t.idx[3]) * out_w;
        float* drow = dst + size_t(y) * out_w;
        for (int x = 0; x < out_w; ++x)
          drow[x] = float(t.w[0] * r0[x] + t.w[1] * r1[x] + t.w[2] * r2[x] + t.w[3] * r3[x]);
      }
    }
  }
  return out;
}

SRPair make_pair(const Image& hr, int scale) {
  SSIU_CHECK(scale >= 1, "scale must be >= 1");
  SSIU_CHECK(hr.h() >= scale && hr.w() >= scale,
             "HR image " << hr.h() << "x" << hr.w() << " smaller than scale " << scale);
  int ch = hr.h() / scale * scale;
  int cw = hr.w() / scale * scale;
  int y0 = (hr.h() - ch) / 2;
  int x0 = (hr.w() - cw) / 2;
  SRPair p;
  p.scale = scale;
  p.hr = (ch == hr.h() && cw == hr.w()) ? hr : crop(hr, y0, x0, ch, cw);
  p.lr = bicubic_resize(p.hr, ch / scale, cw / scale);
  return p;
}

SRPair sample_patch(const SRPair& pair, int patch_lr, Rng& rng) {
  int lh = pair.lr.h(), lw = pair.lr.w();
  SSIU_CHECK(patch_lr >= 1 && patch_lr <= lh && patch_lr <= lw,
             "patch size " << patch_lr << " exceeds LR image " << lh << "x" << lw);
  int y0 = int(rng.uniform_int(lh - patch_lr + 1));
  int x0 = int(rng.uniform_int(lw - patch_lr + 1));
  SRPair out;
  out.scale = pair.scale;
  out.lr = crop(pair.lr, y0, x0, patch_lr, patch_lr);
  out.hr = crop(pair.hr, y0 * pair.scale, x0 * pair.scale, patch_lr * pair.scale,
                patch_lr * pair.scale);
  return out;
}

SRPair augment(const SRPair& pair, Rng& rng) {
  bool flip = rng.bernoulli(0.5);
  int k = int(rng.uniform_int(4));
  SRPair out;
  out.scale = pair.scale;
  out.hr = pair.hr;
  out.lr = pair.lr;
  if (flip) {
    out.hr = hflip(out.hr);
    out.lr = hflip(out.lr);
  }
  if (k != 0) {
    out.hr = rot90(out.hr, k);
    out.lr = rot90(out.lr, k);
  }
  return out;
}

namespace {

std::string index_path(const std::string& root, const std::string& split, int scale) {
  return (fs::path(root) / split / (".index_x" + std::to_string(scale) + ".txt")).string();
}

}  // namespace

DatasetManifest load_manifest(const std::string& root, const std::string& split, int scale,
                              bool regenerate) {
  DatasetManifest m;
  m.root = root;
  m.split = split;
  m.scale = scale;
  fs::path hr_dir = fs::path(root) / split / "HR";
  fs::path lr_dir = fs::path(root) / split / "LR" / ("x" + std::to_string(scale));
  if (!fs::is_directory(hr_dir)) throw io_error("dataset HR directory missing: " + hr_dir.string());

  std::string idx = index_path(root, split, scale);
  if (!regenerate && fs::exists(idx)) {
    std::ifstream f(idx);
    std::string hr_rel, lr_rel;
    while (f >> hr_rel >> lr_rel) {
      ManifestEntry e;
      e.name = fs::path(hr_rel).stem().string();
      e.hr_path = (fs::path(root) / hr_rel).string();
      e.lr_path = (fs::path(root) / lr_rel).string();
      m.entries.push_back(e);
    }
    std::vector<std::string> missing;
    for (const auto& e : m.entries) {
      if (!fs::exists(e.hr_path)) missing.push_back(e.hr_path);
      if (!fs::exists(e.lr_path)) missing.push_back(e.lr_path);
    }
    if (missing.empty() && !m.entries.empty()) return m;
    m.entries.clear();  // stale index, rebuild
  }

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(hr_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) throw io_error("no PNG files under " + hr_dir.string());

  fs::create_directories(lr_dir);
  for (const auto& name : names) {
    ManifestEntry e;
    e.name = fs::path(name).stem().string();
    e.hr_path = (hr_dir / name).string();
    e.lr_path = (lr_dir / name).string();
    if (regenerate || !fs::exists(e.lr_path)) {
      Image hr = read_png(e.hr_path);
      SRPair p = make_pair(hr, scale);
      write_png(p.lr, e.lr_path);
    }
    m.entries.push_back(e);
  }

  std::ofstream f(idx, std::ios::trunc);
  for (const auto& e : m.entries)
    f << fs::relative(e.hr_path, root).string() << " " << fs::relative(e.lr_path, root).string()
      << "\n";
  return m;
}

SRPair load_pair(const ManifestEntry& e, int scale) {
  if (!fs::exists(e.hr_path)) throw io_error("missing HR file: " + e.hr_path);
  if (!fs::exists(e.lr_path)) throw io_error("missing LR file: " + e.lr_path);
  Image hr = read_png(e.hr_path);
  int ch = hr.h() / scale * scale;
  int cw = hr.w() / scale * scale;
  if (ch != hr.h() || cw != hr.w())
    hr = crop(hr, (hr.h() - ch) / 2, (hr.w() - cw) / 2, ch, cw);
  SRPair p;
  p.scale = scale;
  p.hr = hr;
  p.lr = read_png(e.lr_path);
  SSIU_CHECK(p.lr.h() * scale == p.hr.h() && p.lr.w() * scale == p.hr.w(),
             "LR/HR size mismatch for " << e.hr_path);
  return p;
}

}  // namespace ssiu::data
