// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/eval/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ssiu::eval {

Tensor<float> rgb_to_y(const data::Image& img) {
  SSIU_CHECK(img.c() == 3, "rgb_to_y expects 3 channels, got " << img.c());
  int N = img.n(), H = img.h(), W = img.w();
  Tensor<float> y(N, 1, H, W);
  for (int n = 0; n < N; ++n) {
    const float* r = img.plane(n, 0);
    const float* g = img.plane(n, 1);
    const float* b = img.plane(n, 2);
    float* out = y.plane(n, 0);
    for (size_t i = 0, e = size_t(H) * W; i < e; ++i)
      out[i] = (65.481f * r[i] + 128.553f * g[i] + 24.966f * b[i] + 16.0f) / 255.0f;
  }
  return y;
}

namespace {

Tensor<float> shave_plane(const Tensor<float>& y, int shave) {
  SSIU_CHECK(shave >= 0, "shave must be >= 0");
  int H = y.h(), W = y.w();
  SSIU_CHECK(H > 2 * shave && W > 2 * shave,
             "image " << H << "x" << W << " too small for shave " << shave);
  if (shave == 0) return y;
  Tensor<float> out(y.n(), 1, H - 2 * shave, W - 2 * shave);
  for (int n = 0; n < y.n(); ++n) {
    const float* src = y.plane(n, 0);
    float* dst = out.plane(n, 0);
    for (int yy = 0; yy < out.h(); ++yy)
      for (int xx = 0; xx < out.w(); ++xx)
        dst[size_t(yy) * out.w() + xx] = src[size_t(yy + shave) * W + (xx + shave)];
  }
  return out;
}

// Separable valid-mode correlation with a normalized 1-D Gaussian.
void gaussian_valid(const std::vector<double>& img, int H, int W,
                    const std::vector<double>& g1, std::vector<double>& out, int* oh, int* ow) {
  int k = int(g1.size());
  int Hh = H, Wh = W - k + 1;
  std::vector<double> mid(size_t(Hh) * Wh);
  for (int y = 0; y < Hh; ++y)
    for (int x = 0; x < Wh; ++x) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += g1[t] * img[size_t(y) * W + x + t];
      mid[size_t(y) * Wh + x] = s;
    }
  *oh = H - k + 1;
  *ow = Wh;
  out.resize(size_t(*oh) * Wh);
  for (int y = 0; y < *oh; ++y)
    for (int x = 0; x < Wh; ++x) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += g1[t] * mid[size_t(y + t) * Wh + x];
      out[size_t(y) * Wh + x] = s;
    }
}

}  // namespace

double psnr_y(const data::Image& pred, const data::Image& gt, int shave) {
  SSIU_CHECK(pred.shape() == gt.shape(), "psnr_y shape mismatch " << pred.shape().str() << " vs "
                                                                  << gt.shape().str());
  Tensor<float> yp = shave_plane(rgb_to_y(pred), shave);
  Tensor<float> yg = shave_plane(rgb_to_y(gt), shave);
  double mse = 0.0;
  const float* a = yp.data();
  const float* b = yg.data();
  for (size_t i = 0, e = yp.numel(); i < e; ++i) {
    double d = double(a[i]) - double(b[i]);
    mse += d * d;
  }
  mse /= double(yp.numel());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim_y(const data::Image& pred, const data::Image& gt, int shave) {
  SSIU_CHECK(pred.shape() == gt.shape(), "ssim_y shape mismatch");
  Tensor<float> yp = shave_plane(rgb_to_y(pred), shave);
  Tensor<float> yg = shave_plane(rgb_to_y(gt), shave);
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = 0.01 * 0.01;  // (K1 L)^2, L = 1
  constexpr double kC2 = 0.03 * 0.03;
  int H = yp.h(), W = yp.w();
  SSIU_CHECK(H >= kWin && W >= kWin,
             "image " << H << "x" << W << " smaller than the " << kWin << "x" << kWin
                      << " SSIM window after shaving");

  std::vector<double> g1(kWin);
  double gs = 0.0;
  for (int i = 0; i < kWin; ++i) {
    double d = i - (kWin - 1) / 2.0;
    g1[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    gs += g1[i];
  }
  for (double& v : g1) v /= gs;

  size_t P = size_t(H) * W;
  std::vector<double> p(P), g(P), pp(P), gg(P), pg(P);
  for (size_t i = 0; i < P; ++i) {
    p[i] = yp.data()[i];
    g[i] = yg.data()[i];
    pp[i] = p[i] * p[i];
    gg[i] = g[i] * g[i];
    pg[i] = p[i] * g[i];
  }
  std::vector<double> mu_p, mu_g, m_pp, m_gg, m_pg;
  int oh, ow;
  gaussian_valid(p, H, W, g1, mu_p, &oh, &ow);
  gaussian_valid(g, H, W, g1, mu_g, &oh, &ow);
  gaussian_valid(pp, H, W, g1, m_pp, &oh, &ow);
  gaussian_valid(gg, H, W, g1, m_gg, &oh, &ow);
  gaussian_valid(pg, H, W, g1, m_pg, &oh, &ow);

  double acc = 0.0;
  size_t count = size_t(oh) * ow;
  for (size_t i = 0; i < count; ++i) {
    double sp = m_pp[i] - mu_p[i] * mu_p[i];
    double sg = m_gg[i] - mu_g[i] * mu_g[i];
    double spg = m_pg[i] - mu_p[i] * mu_g[i];
    double num = (2.0 * mu_p[i] * mu_g[i] + kC1) * (2.0 * spg + kC2);
    double den = (mu_p[i] * mu_p[i] + mu_g[i] * mu_g[i] + kC1) * (sp + sg + kC2);
    acc += num / den;
  }
  return acc / double(count);
}

}  // namespace ssiu::eval
