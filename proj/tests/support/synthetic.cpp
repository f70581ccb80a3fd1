// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "ssiu/core/rng.hpp"
#include "ssiu/data/png_io.hpp"

namespace ssiu::test {

namespace {

struct Rgb {
  float r, g, b;
};

Rgb random_color(Rng& rng) {
  return {float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.05, 0.95)),
          float(rng.uniform(0.05, 0.95))};
}

void blend(data::Image& img, int y, int x, const Rgb& c, float a) {
  if (a <= 0.f) return;
  a = std::min(a, 1.f);
  size_t i = size_t(y) * img.w() + x;
  img.plane(0, 0)[i] = (1 - a) * img.plane(0, 0)[i] + a * c.r;
  img.plane(0, 1)[i] = (1 - a) * img.plane(0, 1)[i] + a * c.g;
  img.plane(0, 2)[i] = (1 - a) * img.plane(0, 2)[i] + a * c.b;
}

}  // namespace

data::Image synth_image(uint64_t seed, int h, int w) {
  Rng rng(seed ^ 0x5337ab1eull);
  data::Image img(1, 3, h, w);

  // Diagonal two-color gradient background.
  Rgb c0 = random_color(rng), c1 = random_color(rng);
  double gx = rng.uniform(-1.0, 1.0), gy = rng.uniform(-1.0, 1.0);
  double gn = std::hypot(gx, gy) + 1e-9;
  gx /= gn;
  gy /= gn;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double t = 0.5 + 0.5 * (gx * (x / double(w) - 0.5) + gy * (y / double(h) - 0.5)) * 2.0;
      t = std::clamp(t, 0.0, 1.0);
      size_t i = size_t(y) * w + x;
      img.plane(0, 0)[i] = float((1 - t) * c0.r + t * c1.r);
      img.plane(0, 1)[i] = float((1 - t) * c0.g + t * c1.g);
      img.plane(0, 2)[i] = float((1 - t) * c0.b + t * c1.b);
    }

  // A low-frequency sinusoidal texture.
  {
    double fx = rng.uniform(1.5, 5.0) * 2.0 * M_PI / w;
    double fy = rng.uniform(1.5, 5.0) * 2.0 * M_PI / h;
    double amp = rng.uniform(0.03, 0.08);
    double phase = rng.uniform(0.0, 2.0 * M_PI);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        float d = float(amp * std::sin(fx * x + fy * y + phase));
        size_t i = size_t(y) * w + x;
        for (int c = 0; c < 3; ++c)
          img.plane(0, c)[i] = std::clamp(img.plane(0, c)[i] + d, 0.f, 1.f);
      }
  }

  // Anti-aliased discs.
  int discs = 2 + int(rng.uniform_int(4));
  for (int s = 0; s < discs; ++s) {
    Rgb c = random_color(rng);
    double cx = rng.uniform(0.1, 0.9) * w;
    double cy = rng.uniform(0.1, 0.9) * h;
    double r = rng.uniform(0.04, 0.22) * std::min(h, w);
    int y0 = std::max(0, int(cy - r - 2)), y1 = std::min(h, int(cy + r + 2));
    int x0 = std::max(0, int(cx - r - 2)), x1 = std::min(w, int(cx + r + 2));
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
        blend(img, y, x, c, float(r - d + 0.5));
      }
  }

  // Rotated bars (sharp oriented edges and thin structures).
  int bars = 2 + int(rng.uniform_int(4));
  for (int s = 0; s < bars; ++s) {
    Rgb c = random_color(rng);
    double cx = rng.uniform(0.1, 0.9) * w;
    double cy = rng.uniform(0.1, 0.9) * h;
    double ang = rng.uniform(0.0, M_PI);
    double ux = std::cos(ang), uy = std::sin(ang);
    double len = rng.uniform(0.2, 0.6) * std::min(h, w);
    double half_th = rng.uniform(0.8, 4.0);
    int pad = int(len + half_th + 2);
    int y0 = std::max(0, int(cy) - pad), y1 = std::min(h, int(cy) + pad);
    int x0 = std::max(0, int(cx) - pad), x1 = std::min(w, int(cx) + pad);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        double px = x + 0.5 - cx, py = y + 0.5 - cy;
        double along = px * ux + py * uy;
        double across = std::fabs(-px * uy + py * ux);
        if (std::fabs(along) > len / 2) continue;
        blend(img, y, x, c, float(half_th - across + 0.5));
      }
  }

  // A checkerboard patch at a random cell size.
  if (rng.bernoulli(0.7)) {
    Rgb c = random_color(rng);
    int cell = 2 + int(rng.uniform_int(6));
    int ph = int(rng.uniform(0.15, 0.35) * h), pw = int(rng.uniform(0.15, 0.35) * w);
    int oy = int(rng.uniform_int(std::max(1, h - ph)));
    int ox = int(rng.uniform_int(std::max(1, w - pw)));
    for (int y = oy; y < std::min(h, oy + ph); ++y)
      for (int x = ox; x < std::min(w, ox + pw); ++x)
        if (((y - oy) / cell + (x - ox) / cell) % 2 == 0) blend(img, y, x, c, 1.0f);
  }

  return img;
}

void write_synth_split(const std::string& root, const std::string& split, int count, int h, int w,
                       uint64_t seed_base) {
  namespace fs = std::filesystem;
  fs::path dir = fs::path(root) / split / "HR";
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04d.png", i + 1);
    data::Image img = synth_image(seed_base + uint64_t(i) * 7919, h, w);
    data::write_png(img, (dir / name).string());
  }
}

}  // namespace ssiu::test
