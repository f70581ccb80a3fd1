// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/train/loss.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

namespace ssiu::train {

FFTLossMode fft_mode_from_string(const std::string& s) {
  if (s == "complex") return FFTLossMode::complex_l1;
  if (s == "amplitude") return FFTLossMode::amplitude_l1;
  throw std::invalid_argument("fft loss mode must be 'complex' or 'amplitude', got '" + s + "'");
}

template <class T>
double loss_l1(const Tensor<T>& pred, const Tensor<T>& gt) {
  SSIU_CHECK(pred.shape() == gt.shape(), "loss_l1 shape mismatch " << pred.shape().str() << " vs "
                                                                   << gt.shape().str());
  const T* p = pred.data();
  const T* g = gt.data();
  double s = 0.0;
  for (size_t i = 0, e = pred.numel(); i < e; ++i) s += std::fabs(double(p[i]) - double(g[i]));
  return s / double(pred.numel());
}

template <class T>
Tensor<T> loss_l1_grad(const Tensor<T>& pred, const Tensor<T>& gt, T scale) {
  SSIU_CHECK(pred.shape() == gt.shape(), "loss_l1 shape mismatch");
  Tensor<T> grad(pred.n(), pred.c(), pred.h(), pred.w());
  const T* p = pred.data();
  const T* g = gt.data();
  T* d = grad.data();
  T s = scale / T(pred.numel());
  for (size_t i = 0, e = pred.numel(); i < e; ++i) {
    T diff = p[i] - g[i];
    d[i] = diff > T(0) ? s : (diff < T(0) ? -s : T(0));
  }
  return grad;
}

namespace {

// FFTW plans are not thread-safe to create; cache one forward and one
// backward plan per (H, W) behind a mutex and execute with the new-array
// interface.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  void forward(int H, int W, std::complex<double>* in, std::complex<double>* out) {
    run(H, W, in, out, FFTW_FORWARD);
  }
  void backward(int H, int W, std::complex<double>* in, std::complex<double>* out) {
    run(H, W, in, out, FFTW_BACKWARD);
  }

 private:
  void run(int H, int W, std::complex<double>* in, std::complex<double>* out, int sign) {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto key = std::make_tuple(H, W, sign);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<std::complex<double>> a(size_t(H) * W), b(size_t(H) * W);
        fftw_plan p = fftw_plan_dft_2d(H, W, reinterpret_cast<fftw_complex*>(a.data()),
                                       reinterpret_cast<fftw_complex*>(b.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        it = plans_.emplace(key, p).first;
      }
      plan = it->second;
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in),
                     reinterpret_cast<fftw_complex*>(out));
  }

  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

template <class T>
void dft_plane(const T* x, int H, int W, std::vector<std::complex<double>>& out) {
  size_t P = size_t(H) * W;
  std::vector<std::complex<double>> in(P);
  for (size_t i = 0; i < P; ++i) in[i] = std::complex<double>(double(x[i]), 0.0);
  out.resize(P);
  PlanCache::instance().forward(H, W, in.data(), out.data());
}

}  // namespace

template <class T>
double loss_fft(const Tensor<T>& pred, const Tensor<T>& gt, FFTLossMode mode) {
  SSIU_CHECK(pred.shape() == gt.shape(), "loss_fft shape mismatch " << pred.shape().str()
                                                                    << " vs " << gt.shape().str());
  int H = pred.h(), W = pred.w();
  int planes = pred.n() * pred.c();
  size_t P = size_t(H) * W;
  std::vector<std::complex<double>> fp, fg;
  double acc = 0.0;
  for (int pl = 0; pl < planes; ++pl) {
    dft_plane(pred.data() + size_t(pl) * P, H, W, fp);
    dft_plane(gt.data() + size_t(pl) * P, H, W, fg);
    if (mode == FFTLossMode::complex_l1) {
      for (size_t i = 0; i < P; ++i) {
        std::complex<double> d = fp[i] - fg[i];
        acc += std::fabs(d.real()) + std::fabs(d.imag());
      }
    } else {
      for (size_t i = 0; i < P; ++i) acc += std::fabs(std::abs(fp[i]) - std::abs(fg[i]));
    }
  }
  double count = mode == FFTLossMode::complex_l1 ? 2.0 * double(pred.numel())
                                                 : double(pred.numel());
  return acc / count;
}

template <class T>
Tensor<T> loss_fft_grad(const Tensor<T>& pred, const Tensor<T>& gt, T scale, FFTLossMode mode) {
  SSIU_CHECK(pred.shape() == gt.shape(), "loss_fft shape mismatch");
  int H = pred.h(), W = pred.w();
  int planes = pred.n() * pred.c();
  size_t P = size_t(H) * W;
  double norm = mode == FFTLossMode::complex_l1 ? 2.0 * double(pred.numel())
                                                : double(pred.numel());
  Tensor<T> grad(pred.n(), pred.c(), pred.h(), pred.w());
  std::vector<std::complex<double>> fp, fg, sgn(P), adj(P);
  for (int pl = 0; pl < planes; ++pl) {
    dft_plane(pred.data() + size_t(pl) * P, H, W, fp);
    dft_plane(gt.data() + size_t(pl) * P, H, W, fg);
    if (mode == FFTLossMode::complex_l1) {
      for (size_t i = 0; i < P; ++i) {
        std::complex<double> d = fp[i] - fg[i];
        sgn[i] = {d.real() > 0 ? 1.0 : (d.real() < 0 ? -1.0 : 0.0),
                  d.imag() > 0 ? 1.0 : (d.imag() < 0 ? -1.0 : 0.0)};
      }
    } else {
      for (size_t i = 0; i < P; ++i) {
        double ap = std::abs(fp[i]);
        double ag = std::abs(fg[i]);
        double outer = ap > ag ? 1.0 : (ap < ag ? -1.0 : 0.0);
        // d|F|/dF handled through the adjoint transform below; at |F| = 0
        // the subgradient 0 is used.
        sgn[i] = ap > 0.0 ? std::complex<double>(outer * fp[i].real() / ap,
                                                 outer * fp[i].imag() / ap)
                          : std::complex<double>(0.0, 0.0);
      }
    }
    // dL/dx = Re[ adjoint-DFT(sign) ] / norm; the unnormalized backward
    // transform is exactly the adjoint of the unnormalized forward one.
    PlanCache::instance().backward(H, W, sgn.data(), adj.data());
    T* gp = grad.data() + size_t(pl) * P;
    for (size_t i = 0; i < P; ++i) gp[i] = T(adj[i].real() / norm) * scale;
  }
  return grad;
}

template <class T>
double total_loss(const Tensor<T>& pred, const Tensor<T>& gt, double lambda_f, FFTLossMode mode) {
  SSIU_CHECK(lambda_f >= 0.0, "lambda_f must be >= 0");
  double l = loss_l1(pred, gt);
  if (lambda_f > 0.0) l += lambda_f * loss_fft(pred, gt, mode);
  return l;
}

template double loss_l1(const Tensor<float>&, const Tensor<float>&);
template double loss_l1(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> loss_l1_grad(const Tensor<float>&, const Tensor<float>&, float);
template Tensor<double> loss_l1_grad(const Tensor<double>&, const Tensor<double>&, double);
template double loss_fft(const Tensor<float>&, const Tensor<float>&, FFTLossMode);
template double loss_fft(const Tensor<double>&, const Tensor<double>&, FFTLossMode);
template Tensor<float> loss_fft_grad(const Tensor<float>&, const Tensor<float>&, float,
                                     FFTLossMode);
template Tensor<double> loss_fft_grad(const Tensor<double>&, const Tensor<double>&, double,
                                      FFTLossMode);
template double total_loss(const Tensor<float>&, const Tensor<float>&, double, FFTLossMode);
template double total_loss(const Tensor<double>&, const Tensor<double>&, double, FFTLossMode);

}  // namespace ssiu::train
