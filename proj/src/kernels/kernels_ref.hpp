// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scalar reference kernels. These are the semantic ground truth the SIMD
// variants are equivalence-tested against, and the only implementations used
// for double precision.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ssiu::kernels::ref {

template <class T>
void gemm_nn(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc,
             bool accumulate) {
  for (int m = 0; m < M; ++m) {
    T* crow = C + size_t(m) * ldc;
    if (!accumulate)
      for (int n = 0; n < N; ++n) crow[n] = T(0);
    const T* arow = A + size_t(m) * lda;
    for (int k = 0; k < K; ++k) {
      T a = arow[k];
      const T* brow = B + size_t(k) * ldb;
      for (int n = 0; n < N; ++n) crow[n] += a * brow[n];
    }
  }
}

template <class T>
void gemm_nt(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc,
             bool accumulate) {
  for (int m = 0; m < M; ++m) {
    const T* arow = A + size_t(m) * lda;
    T* crow = C + size_t(m) * ldc;
    for (int n = 0; n < N; ++n) {
      const T* brow = B + size_t(n) * ldb;
      T acc = T(0);
      for (int k = 0; k < K; ++k) acc += arow[k] * brow[k];
      crow[n] = accumulate ? crow[n] + acc : acc;
    }
  }
}

template <class T>
void gemm_tn(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc,
             bool accumulate) {
  for (int m = 0; m < M; ++m) {
    T* crow = C + size_t(m) * ldc;
    if (!accumulate)
      for (int n = 0; n < N; ++n) crow[n] = T(0);
    for (int k = 0; k < K; ++k) {
      T a = A[size_t(k) * lda + m];
      const T* brow = B + size_t(k) * ldb;
      for (int n = 0; n < N; ++n) crow[n] += a * brow[n];
    }
  }
}

template <class T> void vadd(const T* a, const T* b, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <class T> void vadd3(const T* a, const T* b, const T* c, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = a[i] + b[i] + c[i];
}

template <class T> void vsub(const T* a, const T* b, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

template <class T> void vmul(const T* a, const T* b, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

template <class T> void vfma(const T* a, const T* b, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

template <class T> void axpy(T alpha, const T* x, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T> void vscale(T alpha, const T* x, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

template <class T> void vadd_const(T alpha, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha;
}

template <class T> T reduce_sum(const T* x, size_t n) {
  T s = T(0);
  for (size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

template <class T> T dot(const T* a, const T* b, size_t n) {
  T s = T(0);
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// gelu(x) = 0.5 x (1 + erf(x / sqrt(2)))
template <class T> void gelu_fwd(const T* x, T* y, size_t n) {
  const T inv_sqrt2 = T(0.7071067811865475244);
  for (size_t i = 0; i < n; ++i) {
    T v = x[i];
    y[i] = T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2));
  }
}

// gelu'(x) = 0.5 (1 + erf(x/sqrt(2))) + x * exp(-x^2/2) / sqrt(2 pi)
template <class T> void gelu_bwd(const T* x, const T* dy, T* dx, size_t n) {
  const T inv_sqrt2 = T(0.7071067811865475244);
  const T inv_sqrt2pi = T(0.3989422804014326779);
  for (size_t i = 0; i < n; ++i) {
    T v = x[i];
    T d = T(0.5) * (T(1) + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(T(-0.5) * v * v);
    dx[i] = dy[i] * d;
  }
}

template <class T> void softmax_rows(T* x, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    T* p = x + size_t(r) * cols;
    T m = p[0];
    for (int j = 1; j < cols; ++j) m = std::max(m, p[j]);
    T s = T(0);
    for (int j = 0; j < cols; ++j) {
      p[j] = std::exp(p[j] - m);
      s += p[j];
    }
    T inv = T(1) / s;
    for (int j = 0; j < cols; ++j) p[j] *= inv;
  }
}

template <class T>
void softmax_over_arrays(const T* const* in, T* const* out, int E, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    T m = in[0][i];
    for (int e = 1; e < E; ++e) m = std::max(m, in[e][i]);
    T s = T(0);
    for (int e = 0; e < E; ++e) {
      T v = std::exp(in[e][i] - m);
      out[e][i] = v;
      s += v;
    }
    T inv = T(1) / s;
    for (int e = 0; e < E; ++e) out[e][i] *= inv;
  }
}

template <class T>
void adam_step(T* w, const T* g, T* m, T* v, size_t n, T lr, T beta1, T beta2, T eps, T bc1,
               T bc2) {
  for (size_t i = 0; i < n; ++i) {
    T gi = g[i];
    m[i] = beta1 * m[i] + (T(1) - beta1) * gi;
    v[i] = beta2 * v[i] + (T(1) - beta2) * gi * gi;
    T mhat = m[i] / bc1;
    T vhat = v[i] / bc2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <class T> void ln_acc_moments(const T* x, T* sum, T* sumsq, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    sum[i] += x[i];
    sumsq[i] += x[i] * x[i];
  }
}

template <class T>
void ln_finalize(const T* sum, const T* sumsq, T inv_c, T eps, T* mean, T* inv_std, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    T mu = sum[i] * inv_c;
    T var = sumsq[i] * inv_c - mu * mu;
    if (var < T(0)) var = T(0);
    mean[i] = mu;
    inv_std[i] = T(1) / std::sqrt(var + eps);
  }
}

template <class T>
void ln_apply(const T* x, const T* mean, const T* inv_std, T gamma, T beta, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = gamma * (x[i] - mean[i]) * inv_std[i] + beta;
}

template <class T>
void ln_bwd_acc(const T* dy, const T* x, const T* mean, const T* inv_std, T gamma, T* t1, T* t2,
                size_t n) {
  for (size_t i = 0; i < n; ++i) {
    T gd = gamma * dy[i];
    t1[i] += gd;
    t2[i] += gd * (x[i] - mean[i]) * inv_std[i];
  }
}

template <class T>
void ln_bwd_dx(const T* dy, const T* x, const T* mean, const T* inv_std, T gamma, const T* t1,
               const T* t2, T inv_c, T* dx, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    T xhat = (x[i] - mean[i]) * inv_std[i];
    dx[i] = inv_std[i] * (gamma * dy[i] - inv_c * (t1[i] + xhat * t2[i]));
  }
}

template <class T>
void ln_param_grad(const T* dy, const T* x, const T* mean, const T* inv_std, size_t n, T* dgamma,
                   T* dbeta) {
  T dg = T(0), db = T(0);
  for (size_t i = 0; i < n; ++i) {
    dg += dy[i] * (x[i] - mean[i]) * inv_std[i];
    db += dy[i];
  }
  *dgamma += dg;
  *dbeta += db;
}

template <class T>
void dwconv_plane_fwd(const T* in, int H, int W, const T* w, int k, T bias, T* out) {
  int p = k / 2;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      T acc = bias;
      for (int i = 0; i < k; ++i) {
        int yy = y + i - p;
        if (yy < 0 || yy >= H) continue;
        for (int j = 0; j < k; ++j) {
          int xx = x + j - p;
          if (xx < 0 || xx >= W) continue;
          acc += w[i * k + j] * in[size_t(yy) * W + xx];
        }
      }
      out[size_t(y) * W + x] = acc;
    }
  }
}

template <class T>
void dwconv_plane_bwd_data(const T* dout, int H, int W, const T* w, int k, T* din) {
  int p = k / 2;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      T acc = T(0);
      // din[y][x] receives w[i][j] * dout[y - i + p][x - j + p]
      for (int i = 0; i < k; ++i) {
        int yy = y - i + p;
        if (yy < 0 || yy >= H) continue;
        for (int j = 0; j < k; ++j) {
          int xx = x - j + p;
          if (xx < 0 || xx >= W) continue;
          acc += w[i * k + j] * dout[size_t(yy) * W + xx];
        }
      }
      din[size_t(y) * W + x] += acc;
    }
  }
}

template <class T>
void dwconv_plane_bwd_w(const T* dout, const T* in, int H, int W, int k, T* dw) {
  int p = k / 2;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      T acc = T(0);
      int y0 = std::max(0, p - i), y1 = std::min(H, H + p - i);
      int x0 = std::max(0, p - j), x1 = std::min(W, W + p - j);
      for (int y = y0; y < y1; ++y) {
        const T* drow = dout + size_t(y) * W;
        const T* irow = in + size_t(y + i - p) * W;
        for (int x = x0; x < x1; ++x) acc += drow[x] * irow[x + j - p];
      }
      dw[i * k + j] += acc;
    }
  }
}

}  // namespace ssiu::kernels::ref
