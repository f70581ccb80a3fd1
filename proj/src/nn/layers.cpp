// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/nn/layers.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "ssiu/core/parallel.hpp"
#include "ssiu/kernels/kernels.hpp"

namespace ssiu::nn {

namespace k = ssiu::kernels;

// ---------------------------------------------------------------------------
// Conv2d
// ---------------------------------------------------------------------------

template <class T>
Conv2d<T>::Conv2d(int in_ch, int out_ch, int ksize) : in_ch_(in_ch), out_ch_(out_ch), k_(ksize) {
  SSIU_CHECK(in_ch >= 1 && out_ch >= 1, "conv channels must be >= 1");
  SSIU_CHECK(ksize >= 1 && ksize % 2 == 1, "conv kernel must be odd, got " << ksize);
  weight.value = Tensor<T>::zeros(out_ch, in_ch, ksize, ksize);
  bias.value = Tensor<T>::zeros(1, 1, 1, out_ch);
}

namespace {

// Expand one item into [in_ch*k*k x H*W] patch-rows (zero padding k/2).
template <class T>
void im2col(const T* x, int C, int H, int W, int ksz, T* cols) {
  int pad = ksz / 2;
  size_t P = size_t(H) * W;
  for (int ic = 0; ic < C; ++ic) {
    const T* plane = x + size_t(ic) * P;
    for (int ki = 0; ki < ksz; ++ki) {
      for (int kj = 0; kj < ksz; ++kj) {
        T* row = cols + (size_t(ic) * ksz * ksz + size_t(ki) * ksz + kj) * P;
        int sy = ki - pad, sx = kj - pad;
        for (int y = 0; y < H; ++y) {
          T* dst = row + size_t(y) * W;
          int yy = y + sy;
          if (yy < 0 || yy >= H) {
            std::memset(dst, 0, sizeof(T) * W);
            continue;
          }
          const T* src = plane + size_t(yy) * W;
          int x0 = std::max(0, -sx);
          int x1 = std::min(W, W - sx);
          if (x0 > 0) std::memset(dst, 0, sizeof(T) * x0);
          if (x1 > x0) std::memcpy(dst + x0, src + x0 + sx, sizeof(T) * (x1 - x0));
          if (x1 < W) std::memset(dst + x1, 0, sizeof(T) * (W - x1));
        }
      }
    }
  }
}

template <class T>
void col2im_acc(const T* cols, int C, int H, int W, int ksz, T* dx) {
  int pad = ksz / 2;
  size_t P = size_t(H) * W;
  for (int ic = 0; ic < C; ++ic) {
    T* plane = dx + size_t(ic) * P;
    for (int ki = 0; ki < ksz; ++ki) {
      for (int kj = 0; kj < ksz; ++kj) {
        const T* row = cols + (size_t(ic) * ksz * ksz + size_t(ki) * ksz + kj) * P;
        int sy = ki - pad, sx = kj - pad;
        for (int y = 0; y < H; ++y) {
          int yy = y + sy;
          if (yy < 0 || yy >= H) continue;
          const T* src = row + size_t(y) * W;
          T* dst = plane + size_t(yy) * W;
          int x0 = std::max(0, -sx);
          int x1 = std::min(W, W - sx);
          for (int x = x0; x < x1; ++x) dst[x + sx] += src[x];
        }
      }
    }
  }
}

constexpr int kConvRowChunk = 16;

}  // namespace

template <class T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Cache* cache) const {
  SSIU_CHECK(x.c() == in_ch_, "conv expects " << in_ch_ << " channels, got " << x.c());
  int N = x.n(), H = x.h(), W = x.w();
  size_t P = size_t(H) * W;
  int K = in_ch_ * k_ * k_;
  Tensor<T> y(N, out_ch_, H, W);
  const T* wmat = weight.value.data();
  const T* b = bias.value.data();

  int nchunks = (out_ch_ + kConvRowChunk - 1) / kConvRowChunk;
  if (k_ == 1) {
    parallel_for(0, int64_t(N) * nchunks, [&](int64_t lo, int64_t hi) {
      for (int64_t idx = lo; idx < hi; ++idx) {
        int n = int(idx / nchunks);
        int r0 = int(idx % nchunks) * kConvRowChunk;
        int r1 = std::min(out_ch_, r0 + kConvRowChunk);
        k::gemm_nn(r1 - r0, int(P), K, wmat + size_t(r0) * K, K, x.plane(n, 0), int(P),
                   y.plane(n, r0), int(P), false);
      }
    });
  } else {
    if (N > 1) {
      parallel_for(0, N, [&](int64_t lo, int64_t hi) {
        std::vector<T> cols(size_t(K) * P);
        for (int64_t n = lo; n < hi; ++n) {
          im2col(x.plane(int(n), 0), in_ch_, H, W, k_, cols.data());
          k::gemm_nn(out_ch_, int(P), K, wmat, K, cols.data(), int(P), y.plane(int(n), 0), int(P),
                     false);
        }
      });
    } else {
      std::vector<T> cols(size_t(K) * P);
      im2col(x.plane(0, 0), in_ch_, H, W, k_, cols.data());
      parallel_for(0, nchunks, [&](int64_t lo, int64_t hi) {
        for (int64_t ch = lo; ch < hi; ++ch) {
          int r0 = int(ch) * kConvRowChunk;
          int r1 = std::min(out_ch_, r0 + kConvRowChunk);
          k::gemm_nn(r1 - r0, int(P), K, wmat + size_t(r0) * K, K, cols.data(), int(P),
                     y.plane(0, r0), int(P), false);
        }
      });
    }
  }
  parallel_for(0, int64_t(N) * out_ch_, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx)
      k::vadd_const(b[idx % out_ch_], y.data() + size_t(idx) * P, P);
  });
  if (cache) cache->input = x;
  return y;
}

template <class T>
Tensor<T> Conv2d<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  const Tensor<T>& x = cache.input;
  SSIU_CHECK(!x.empty(), "conv backward without cached forward");
  SSIU_CHECK(dy.c() == out_ch_ && dy.h() == x.h() && dy.w() == x.w() && dy.n() == x.n(),
             "conv backward shape mismatch");
  int N = x.n(), H = x.h(), W = x.w();
  size_t P = size_t(H) * W;
  int K = in_ch_ * k_ * k_;
  weight.ensure_grad();
  bias.ensure_grad();

  // Bias gradient: one output channel per task, items accumulated in order.
  T* bg = bias.grad.data();
  parallel_for(0, out_ch_, [&](int64_t lo, int64_t hi) {
    for (int64_t oc = lo; oc < hi; ++oc) {
      T s = T(0);
      for (int n = 0; n < N; ++n) s += k::reduce_sum(dy.plane(n, int(oc)), P);
      bg[oc] += s;
    }
  });

  // Weight gradient: row chunks in parallel, items serial inside each chunk.
  T* wg = weight.grad.data();
  int nchunks = (out_ch_ + kConvRowChunk - 1) / kConvRowChunk;
  if (k_ == 1) {
    parallel_for(0, nchunks, [&](int64_t lo, int64_t hi) {
      for (int64_t ch = lo; ch < hi; ++ch) {
        int r0 = int(ch) * kConvRowChunk;
        int r1 = std::min(out_ch_, r0 + kConvRowChunk);
        for (int n = 0; n < N; ++n)
          k::gemm_nt(r1 - r0, K, int(P), dy.plane(n, r0), int(P), x.plane(n, 0), int(P),
                     wg + size_t(r0) * K, K, true);
      }
    });
  } else {
    std::vector<T> cols(size_t(K) * P);
    for (int n = 0; n < N; ++n) {
      im2col(x.plane(n, 0), in_ch_, H, W, k_, cols.data());
      parallel_for(0, nchunks, [&](int64_t lo, int64_t hi) {
        for (int64_t ch = lo; ch < hi; ++ch) {
          int r0 = int(ch) * kConvRowChunk;
          int r1 = std::min(out_ch_, r0 + kConvRowChunk);
          k::gemm_nt(r1 - r0, K, int(P), dy.plane(n, r0), int(P), cols.data(), int(P),
                     wg + size_t(r0) * K, K, true);
        }
      });
    }
  }

  // Data gradient.
  Tensor<T> dx(N, in_ch_, H, W);
  const T* wmat = weight.value.data();
  if (k_ == 1) {
    parallel_for(0, N, [&](int64_t lo, int64_t hi) {
      for (int64_t n = lo; n < hi; ++n)
        k::gemm_tn(K, int(P), out_ch_, wmat, K, dy.plane(int(n), 0), int(P), dx.plane(int(n), 0),
                   int(P), false);
    });
  } else {
    dx.fill(T(0));
    parallel_for(0, N, [&](int64_t lo, int64_t hi) {
      std::vector<T> dcols(size_t(K) * P);
      for (int64_t n = lo; n < hi; ++n) {
        k::gemm_tn(K, int(P), out_ch_, wmat, K, dy.plane(int(n), 0), int(P), dcols.data(), int(P),
                   false);
        col2im_acc(dcols.data(), in_ch_, H, W, k_, dx.plane(int(n), 0));
      }
    });
  }
  return dx;
}

// ---------------------------------------------------------------------------
// DepthwiseConv2d
// ---------------------------------------------------------------------------

template <class T>
DepthwiseConv2d<T>::DepthwiseConv2d(int channels, int ksize) : channels_(channels), k_(ksize) {
  SSIU_CHECK(channels >= 1, "depthwise channels must be >= 1");
  SSIU_CHECK(ksize >= 3 && ksize % 2 == 1, "depthwise kernel must be odd >= 3, got " << ksize);
  weight.value = Tensor<T>::zeros(channels, 1, ksize, ksize);
  bias.value = Tensor<T>::zeros(1, 1, 1, channels);
}

template <class T>
Tensor<T> DepthwiseConv2d<T>::forward(const Tensor<T>& x, Cache* cache) const {
  SSIU_CHECK(x.c() == channels_, "depthwise expects " << channels_ << " channels, got " << x.c());
  int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  Tensor<T> y(N, C, H, W);
  const T* b = bias.value.data();
  parallel_for(0, int64_t(N) * C, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int n = int(idx / C), c = int(idx % C);
      k::dwconv_plane_fwd(x.plane(n, c), H, W, weight.value.plane(c, 0), k_, b[c], y.plane(n, c));
    }
  });
  if (cache) cache->input = x;
  return y;
}

template <class T>
Tensor<T> DepthwiseConv2d<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  const Tensor<T>& x = cache.input;
  SSIU_CHECK(!x.empty(), "depthwise backward without cached forward");
  SSIU_CHECK(dy.shape() == x.shape(), "depthwise backward shape mismatch");
  int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  size_t P = size_t(H) * W;
  weight.ensure_grad();
  bias.ensure_grad();
  T* bg = bias.grad.data();
  Tensor<T> dx = Tensor<T>::zeros(N, C, H, W);
  parallel_for(0, C, [&](int64_t lo, int64_t hi) {
    for (int64_t c = lo; c < hi; ++c) {
      T bsum = T(0);
      for (int n = 0; n < N; ++n) {
        k::dwconv_plane_bwd_data(dy.plane(n, int(c)), H, W, weight.value.plane(int(c), 0), k_,
                                 dx.plane(n, int(c)));
        k::dwconv_plane_bwd_w(dy.plane(n, int(c)), x.plane(n, int(c)), H, W, k_,
                              weight.grad.plane(int(c), 0));
        bsum += k::reduce_sum(dy.plane(n, int(c)), P);
      }
      bg[c] += bsum;
    }
  });
  return dx;
}

// ---------------------------------------------------------------------------
// LayerNormChannel
// ---------------------------------------------------------------------------

template <class T>
LayerNormChannel<T>::LayerNormChannel(int channels, T eps) : channels_(channels), eps_(eps) {
  SSIU_CHECK(channels >= 1, "layer norm channels must be >= 1");
  gamma.value = Tensor<T>::full(1, 1, 1, channels, T(1));
  beta.value = Tensor<T>::zeros(1, 1, 1, channels);
}

template <class T>
Tensor<T> LayerNormChannel<T>::forward(const Tensor<T>& x, Cache* cache) const {
  SSIU_CHECK(x.c() == channels_, "layer norm expects " << channels_ << " channels");
  int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  size_t P = size_t(H) * W;
  Tensor<T> mean(N, 1, H, W), inv_std(N, 1, H, W);
  parallel_for(0, N, [&](int64_t lo, int64_t hi) {
    for (int64_t n = lo; n < hi; ++n) {
      T* sum = mean.plane(int(n), 0);
      T* sumsq = inv_std.plane(int(n), 0);
      std::memset(sum, 0, sizeof(T) * P);
      std::memset(sumsq, 0, sizeof(T) * P);
      for (int c = 0; c < C; ++c) k::ln_acc_moments(x.plane(int(n), c), sum, sumsq, P);
      k::ln_finalize(sum, sumsq, T(1) / T(C), eps_, sum, sumsq, P);  // in place
    }
  });
  Tensor<T> y(N, C, H, W);
  const T* g = gamma.value.data();
  const T* b = beta.value.data();
  parallel_for(0, int64_t(N) * C, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int n = int(idx / C), c = int(idx % C);
      k::ln_apply(x.plane(n, c), mean.plane(n, 0), inv_std.plane(n, 0), g[c], b[c], y.plane(n, c),
                  P);
    }
  });
  if (cache) {
    cache->input = x;
    cache->mean = mean;
    cache->inv_std = inv_std;
  }
  return y;
}

template <class T>
Tensor<T> LayerNormChannel<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  const Tensor<T>& x = cache.input;
  SSIU_CHECK(!x.empty(), "layer norm backward without cached forward");
  SSIU_CHECK(dy.shape() == x.shape(), "layer norm backward shape mismatch");
  int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  size_t P = size_t(H) * W;
  gamma.ensure_grad();
  beta.ensure_grad();
  const T* g = gamma.value.data();

  Tensor<T> t1(N, 1, H, W), t2(N, 1, H, W);
  parallel_for(0, N, [&](int64_t lo, int64_t hi) {
    for (int64_t n = lo; n < hi; ++n) {
      T* p1 = t1.plane(int(n), 0);
      T* p2 = t2.plane(int(n), 0);
      std::memset(p1, 0, sizeof(T) * P);
      std::memset(p2, 0, sizeof(T) * P);
      for (int c = 0; c < C; ++c)
        k::ln_bwd_acc(dy.plane(int(n), c), x.plane(int(n), c), cache.mean.plane(int(n), 0),
                      cache.inv_std.plane(int(n), 0), g[c], p1, p2, P);
    }
  });
  Tensor<T> dx(N, C, H, W);
  parallel_for(0, int64_t(N) * C, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int n = int(idx / C), c = int(idx % C);
      k::ln_bwd_dx(dy.plane(n, c), x.plane(n, c), cache.mean.plane(n, 0),
                   cache.inv_std.plane(n, 0), g[c], t1.plane(n, 0), t2.plane(n, 0), T(1) / T(C),
                   dx.plane(n, c), P);
    }
  });
  T* gg = gamma.grad.data();
  T* bg = beta.grad.data();
  parallel_for(0, C, [&](int64_t lo, int64_t hi) {
    for (int64_t c = lo; c < hi; ++c)
      for (int n = 0; n < N; ++n)
        k::ln_param_grad(dy.plane(n, int(c)), x.plane(n, int(c)), cache.mean.plane(n, 0),
                         cache.inv_std.plane(n, 0), P, gg + c, bg + c);
  });
  return dx;
}

// ---------------------------------------------------------------------------
// Gelu
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> Gelu<T>::forward(const Tensor<T>& x, Cache* cache) {
  Tensor<T> y(x.n(), x.c(), x.h(), x.w());
  size_t total = x.numel();
  size_t grain = 1 << 16;
  int64_t parts = int64_t((total + grain - 1) / grain);
  parallel_for(0, parts, [&](int64_t lo, int64_t hi) {
    size_t b = size_t(lo) * grain;
    size_t e = std::min(total, size_t(hi) * grain);
    if (e > b) k::gelu_fwd(x.data() + b, y.data() + b, e - b);
  });
  if (cache) cache->input = x;
  return y;
}

template <class T>
Tensor<T> Gelu<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  const Tensor<T>& x = cache.input;
  SSIU_CHECK(!x.empty(), "gelu backward without cached forward");
  SSIU_CHECK(dy.shape() == x.shape(), "gelu backward shape mismatch");
  Tensor<T> dx(x.n(), x.c(), x.h(), x.w());
  size_t total = x.numel();
  size_t grain = 1 << 16;
  int64_t parts = int64_t((total + grain - 1) / grain);
  parallel_for(0, parts, [&](int64_t lo, int64_t hi) {
    size_t b = size_t(lo) * grain;
    size_t e = std::min(total, size_t(hi) * grain);
    if (e > b) k::gelu_bwd(x.data() + b, dy.data() + b, dx.data() + b, e - b);
  });
  return dx;
}

// ---------------------------------------------------------------------------
// MaxPool2d
// ---------------------------------------------------------------------------

template <class T>
void MaxPool2d<T>::out_size(int size, int kernel, int stride, int* padded, int* out) {
  int steps = size <= kernel ? 0 : (size - kernel + stride - 1) / stride;
  *padded = kernel + steps * stride;
  *out = steps + 1;
}

template <class T>
Tensor<T> MaxPool2d<T>::forward(const Tensor<T>& x, Cache* cache) const {
  int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  SSIU_CHECK(H >= kernel_ && W >= kernel_,
             "max pool input " << H << "x" << W << " smaller than kernel " << kernel_);
  int Hp, H1, Wp, W1;
  out_size(H, kernel_, stride_, &Hp, &H1);
  out_size(W, kernel_, stride_, &Wp, &W1);
  Tensor<T> y(N, C, H1, W1);
  if (cache) {
    cache->in_shape = x.shape();
    cache->argmax.assign(size_t(N) * C * H1 * W1, 0);
  }
  int32_t* am = cache ? cache->argmax.data() : nullptr;
  parallel_for(0, int64_t(N) * C, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      const T* in = x.data() + size_t(idx) * H * W;
      T* out = y.data() + size_t(idx) * H1 * W1;
      int32_t* amp = am ? am + size_t(idx) * H1 * W1 : nullptr;
      for (int oy = 0; oy < H1; ++oy) {
        for (int ox = 0; ox < W1; ++ox) {
          T best = -std::numeric_limits<T>::infinity();
          int32_t besti = 0;
          for (int ky = 0; ky < kernel_; ++ky) {
            int yy = fold_index(oy * stride_ + ky, H);
            for (int kx = 0; kx < kernel_; ++kx) {
              int xx = fold_index(ox * stride_ + kx, W);
              T v = in[size_t(yy) * W + xx];
              if (v > best) {
                best = v;
                besti = int32_t(yy * W + xx);
              }
            }
          }
          out[size_t(oy) * W1 + ox] = best;
          if (amp) amp[size_t(oy) * W1 + ox] = besti;
        }
      }
    }
  });
  return y;
}

template <class T>
Tensor<T> MaxPool2d<T>::backward(const Cache& cache, const Tensor<T>& dy) const {
  Shape4 s = cache.in_shape;
  SSIU_CHECK(s.numel() > 0, "max pool backward without cached forward");
  Tensor<T> dx = Tensor<T>::zeros(s.n, s.c, s.h, s.w);
  int H1 = dy.h(), W1 = dy.w();
  parallel_for(0, int64_t(s.n) * s.c, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      const T* g = dy.data() + size_t(idx) * H1 * W1;
      const int32_t* amp = cache.argmax.data() + size_t(idx) * H1 * W1;
      T* out = dx.data() + size_t(idx) * s.h * s.w;
      for (size_t i = 0, e = size_t(H1) * W1; i < e; ++i) out[amp[i]] += g[i];
    }
  });
  return dx;
}

// ---------------------------------------------------------------------------
// BilinearResize
// ---------------------------------------------------------------------------

namespace {

struct LinTap {
  int i0, i1;
  double w0, w1;
};

inline void make_taps(int in_size, int out_size, std::vector<LinTap>& taps) {
  taps.resize(out_size);
  double scale = double(in_size) / double(out_size);
  for (int o = 0; o < out_size; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    double fl = std::floor(src);
    int i0 = int(fl);
    double f = src - fl;
    int i1 = i0 + 1;
    if (i0 < 0) i0 = 0;
    if (i1 < 0) i1 = 0;
    if (i0 > in_size - 1) i0 = in_size - 1;
    if (i1 > in_size - 1) i1 = in_size - 1;
    taps[o] = {i0, i1, 1.0 - f, f};
  }
}

}  // namespace

template <class T>
Tensor<T> BilinearResize<T>::forward(const Tensor<T>& x, int out_h, int out_w, Cache* cache) {
  SSIU_CHECK(out_h >= 1 && out_w >= 1, "bilinear output size must be >= 1");
  int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  std::vector<LinTap> ty, tx;
  make_taps(H, out_h, ty);
  make_taps(W, out_w, tx);
  Tensor<T> y(N, C, out_h, out_w);
  parallel_for(0, int64_t(N) * C, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      const T* in = x.data() + size_t(idx) * H * W;
      T* out = y.data() + size_t(idx) * out_h * out_w;
      for (int oy = 0; oy < out_h; ++oy) {
        const LinTap& a = ty[oy];
        const T* r0 = in + size_t(a.i0) * W;
        const T* r1 = in + size_t(a.i1) * W;
        T* orow = out + size_t(oy) * out_w;
        for (int ox = 0; ox < out_w; ++ox) {
          const LinTap& b = tx[ox];
          double top = a.w0 * (b.w0 * r0[b.i0] + b.w1 * r0[b.i1]);
          double bot = a.w1 * (b.w0 * r1[b.i0] + b.w1 * r1[b.i1]);
          orow[ox] = T(top + bot);
        }
      }
    }
  });
  if (cache) cache->in_shape = x.shape();
  return y;
}

template <class T>
Tensor<T> BilinearResize<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  Shape4 s = cache.in_shape;
  SSIU_CHECK(s.numel() > 0, "bilinear backward without cached forward");
  int out_h = dy.h(), out_w = dy.w();
  std::vector<LinTap> ty, tx;
  make_taps(s.h, out_h, ty);
  make_taps(s.w, out_w, tx);
  Tensor<T> dx = Tensor<T>::zeros(s.n, s.c, s.h, s.w);
  parallel_for(0, int64_t(s.n) * s.c, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      const T* g = dy.data() + size_t(idx) * out_h * out_w;
      T* out = dx.data() + size_t(idx) * s.h * s.w;
      for (int oy = 0; oy < out_h; ++oy) {
        const LinTap& a = ty[oy];
        for (int ox = 0; ox < out_w; ++ox) {
          const LinTap& b = tx[ox];
          T v = g[size_t(oy) * out_w + ox];
          out[size_t(a.i0) * s.w + b.i0] += T(a.w0 * b.w0) * v;
          out[size_t(a.i0) * s.w + b.i1] += T(a.w0 * b.w1) * v;
          out[size_t(a.i1) * s.w + b.i0] += T(a.w1 * b.w0) * v;
          out[size_t(a.i1) * s.w + b.i1] += T(a.w1 * b.w1) * v;
        }
      }
    }
  });
  return dx;
}

// ---------------------------------------------------------------------------
// PixelShuffle
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> PixelShuffle<T>::forward(const Tensor<T>& x, Cache* cache) const {
  int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  SSIU_CHECK(C % (s_ * s_) == 0, "pixel shuffle needs channels divisible by s^2");
  int Co = C / (s_ * s_);
  Tensor<T> y(N, Co, H * s_, W * s_);
  parallel_for(0, int64_t(N) * Co, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int n = int(idx / Co), co = int(idx % Co);
      T* out = y.plane(n, co);
      for (int dy = 0; dy < s_; ++dy) {
        for (int dx = 0; dx < s_; ++dx) {
          const T* in = x.plane(n, co * s_ * s_ + dy * s_ + dx);
          for (int yy = 0; yy < H; ++yy) {
            T* orow = out + size_t(yy * s_ + dy) * (W * s_) + dx;
            const T* irow = in + size_t(yy) * W;
            for (int xx = 0; xx < W; ++xx) orow[size_t(xx) * s_] = irow[xx];
          }
        }
      }
    }
  });
  if (cache) cache->in_shape = x.shape();
  return y;
}

template <class T>
Tensor<T> PixelShuffle<T>::backward(const Cache& cache, const Tensor<T>& dy) const {
  Shape4 s = cache.in_shape;
  SSIU_CHECK(s.numel() > 0, "pixel shuffle backward without cached forward");
  int Co = s.c / (s_ * s_);
  Tensor<T> dx(s.n, s.c, s.h, s.w);
  parallel_for(0, int64_t(s.n) * Co, [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int n = int(idx / Co), co = int(idx % Co);
      const T* g = dy.plane(n, co);
      for (int ddy = 0; ddy < s_; ++ddy) {
        for (int ddx = 0; ddx < s_; ++ddx) {
          T* out = dx.plane(n, co * s_ * s_ + ddy * s_ + ddx);
          for (int yy = 0; yy < s.h; ++yy) {
            const T* grow = g + size_t(yy * s_ + ddy) * (s.w * s_) + ddx;
            T* orow = out + size_t(yy) * s.w;
            for (int xx = 0; xx < s.w; ++xx) orow[xx] = grow[size_t(xx) * s_];
          }
        }
      }
    }
  });
  return dx;
}

// ---------------------------------------------------------------------------
// Elementwise helpers
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  SSIU_CHECK(a.shape() == b.shape(), "add shape mismatch " << a.shape().str() << " vs "
                                                           << b.shape().str());
  Tensor<T> y(a.n(), a.c(), a.h(), a.w());
  k::vadd(a.data(), b.data(), y.data(), a.numel());
  return y;
}

template <class T>
Tensor<T> add3(const Tensor<T>& a, const Tensor<T>& b, const Tensor<T>& c) {
  SSIU_CHECK(a.shape() == b.shape() && a.shape() == c.shape(), "add3 shape mismatch");
  Tensor<T> y(a.n(), a.c(), a.h(), a.w());
  k::vadd3(a.data(), b.data(), c.data(), y.data(), a.numel());
  return y;
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  SSIU_CHECK(a.shape() == b.shape(), "mul shape mismatch");
  Tensor<T> y(a.n(), a.c(), a.h(), a.w());
  k::vmul(a.data(), b.data(), y.data(), a.numel());
  return y;
}

template <class T>
void add_inplace(Tensor<T>& y, const Tensor<T>& x) {
  SSIU_CHECK(y.shape() == x.shape(), "add_inplace shape mismatch");
  k::vadd(y.data(), x.data(), y.data(), y.numel());
}

// Explicit instantiations.
template class Conv2d<float>;
template class Conv2d<double>;
template class DepthwiseConv2d<float>;
template class DepthwiseConv2d<double>;
template class LayerNormChannel<float>;
template class LayerNormChannel<double>;
template struct Gelu<float>;
template struct Gelu<double>;
template class MaxPool2d<float>;
template class MaxPool2d<double>;
template class BilinearResize<float>;
template class BilinearResize<double>;
template class PixelShuffle<float>;
template class PixelShuffle<double>;
template Tensor<float> add(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> add(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> add3(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&);
template Tensor<double> add3(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&);
template Tensor<float> mul(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> mul(const Tensor<double>&, const Tensor<double>&);
template void add_inplace(Tensor<float>&, const Tensor<float>&);
template void add_inplace(Tensor<double>&, const Tensor<double>&);

}  // namespace ssiu::nn
