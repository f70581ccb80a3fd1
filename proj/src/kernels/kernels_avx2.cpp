// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2+FMA float kernels. Compiled with -mavx2 -mfma on x86-64 only; the
// dispatcher falls back to the scalar reference elsewhere. exp and erf are
// evaluated with polynomial approximations (~2e-7 absolute error); the
// kernel equivalence tests budget for that plus FMA re-association.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <limits>

#include "kernels_ref.hpp"
#include "kernels_table.hpp"

namespace ssiu::kernels {
namespace {

inline __m256 exp256(__m256 x) {
  // Cephes-style expf: clamp, range-reduce by ln2, degree-5 polynomial.
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-88.3762626647949f);
  const __m256 log2e = _mm256_set1_ps(1.44269504088896341f);
  const __m256 c1 = _mm256_set1_ps(0.693359375f);
  const __m256 c2 = _mm256_set1_ps(-2.12194440e-4f);
  const __m256 half = _mm256_set1_ps(0.5f);
  const __m256 one = _mm256_set1_ps(1.0f);

  x = _mm256_min_ps(x, hi);
  x = _mm256_max_ps(x, lo);

  __m256 fx = _mm256_fmadd_ps(x, log2e, half);
  fx = _mm256_floor_ps(fx);
  x = _mm256_fnmadd_ps(fx, c1, x);
  x = _mm256_fnmadd_ps(fx, c2, x);

  __m256 z = _mm256_mul_ps(x, x);
  __m256 y = _mm256_set1_ps(1.9875691500e-4f);
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
  y = _mm256_fmadd_ps(y, z, x);
  y = _mm256_add_ps(y, one);

  __m256i n = _mm256_cvtps_epi32(fx);
  n = _mm256_add_epi32(n, _mm256_set1_epi32(127));
  n = _mm256_slli_epi32(n, 23);
  return _mm256_mul_ps(y, _mm256_castsi256_ps(n));
}

inline __m256 erf256(__m256 x) {
  // Abramowitz & Stegun 7.1.26, odd extension; |error| <= 1.5e-7.
  const __m256 sign_mask = _mm256_set1_ps(-0.0f);
  __m256 sign = _mm256_and_ps(x, sign_mask);
  __m256 ax = _mm256_andnot_ps(sign_mask, x);

  const __m256 one = _mm256_set1_ps(1.0f);
  __m256 t = _mm256_div_ps(one, _mm256_fmadd_ps(_mm256_set1_ps(0.3275911f), ax, one));
  __m256 y = _mm256_set1_ps(1.061405429f);
  y = _mm256_fmadd_ps(y, t, _mm256_set1_ps(-1.453152027f));
  y = _mm256_fmadd_ps(y, t, _mm256_set1_ps(1.421413741f));
  y = _mm256_fmadd_ps(y, t, _mm256_set1_ps(-0.284496736f));
  y = _mm256_fmadd_ps(y, t, _mm256_set1_ps(0.254829592f));
  y = _mm256_mul_ps(y, t);
  __m256 e = exp256(_mm256_mul_ps(_mm256_sub_ps(_mm256_setzero_ps(), ax), ax));
  __m256 r = _mm256_fnmadd_ps(y, e, one);
  return _mm256_or_ps(r, sign);
}

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

// ---------------------------------------------------------------------------
// GEMM. nn/tn use a broadcast-A row-block kernel (4 rows x 16 columns);
// nt uses vectorized dot products over K.
// ---------------------------------------------------------------------------

void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C,
             int ldc, bool accumulate) {
  int m = 0;
  for (; m + 4 <= M; m += 4) {
    float* c0 = C + size_t(m) * ldc;
    float* c1 = c0 + ldc;
    float* c2 = c1 + ldc;
    float* c3 = c2 + ldc;
    if (!accumulate)
      for (int n = 0; n < N; ++n) c0[n] = c1[n] = c2[n] = c3[n] = 0.0f;
    const float* a0 = A + size_t(m) * lda;
    const float* a1 = a0 + lda;
    const float* a2 = a1 + lda;
    const float* a3 = a2 + lda;
    for (int k = 0; k < K; ++k) {
      __m256 w0 = _mm256_broadcast_ss(a0 + k);
      __m256 w1 = _mm256_broadcast_ss(a1 + k);
      __m256 w2 = _mm256_broadcast_ss(a2 + k);
      __m256 w3 = _mm256_broadcast_ss(a3 + k);
      const float* b = B + size_t(k) * ldb;
      int n = 0;
      for (; n + 8 <= N; n += 8) {
        __m256 bv = _mm256_loadu_ps(b + n);
        _mm256_storeu_ps(c0 + n, _mm256_fmadd_ps(w0, bv, _mm256_loadu_ps(c0 + n)));
        _mm256_storeu_ps(c1 + n, _mm256_fmadd_ps(w1, bv, _mm256_loadu_ps(c1 + n)));
        _mm256_storeu_ps(c2 + n, _mm256_fmadd_ps(w2, bv, _mm256_loadu_ps(c2 + n)));
        _mm256_storeu_ps(c3 + n, _mm256_fmadd_ps(w3, bv, _mm256_loadu_ps(c3 + n)));
      }
      for (; n < N; ++n) {
        float bv = b[n];
        c0[n] += a0[k] * bv;
        c1[n] += a1[k] * bv;
        c2[n] += a2[k] * bv;
        c3[n] += a3[k] * bv;
      }
    }
  }
  for (; m < M; ++m) {
    float* c0 = C + size_t(m) * ldc;
    if (!accumulate)
      for (int n = 0; n < N; ++n) c0[n] = 0.0f;
    const float* a0 = A + size_t(m) * lda;
    for (int k = 0; k < K; ++k) {
      __m256 w0 = _mm256_broadcast_ss(a0 + k);
      const float* b = B + size_t(k) * ldb;
      int n = 0;
      for (; n + 8 <= N; n += 8)
        _mm256_storeu_ps(c0 + n, _mm256_fmadd_ps(w0, _mm256_loadu_ps(b + n),
                                                 _mm256_loadu_ps(c0 + n)));
      for (; n < N; ++n) c0[n] += a0[k] * b[n];
    }
  }
}

void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C,
             int ldc, bool accumulate) {
  int m = 0;
  for (; m + 4 <= M; m += 4) {
    float* c0 = C + size_t(m) * ldc;
    float* c1 = c0 + ldc;
    float* c2 = c1 + ldc;
    float* c3 = c2 + ldc;
    if (!accumulate)
      for (int n = 0; n < N; ++n) c0[n] = c1[n] = c2[n] = c3[n] = 0.0f;
    for (int k = 0; k < K; ++k) {
      const float* arow = A + size_t(k) * lda + m;
      __m256 w0 = _mm256_broadcast_ss(arow + 0);
      __m256 w1 = _mm256_broadcast_ss(arow + 1);
      __m256 w2 = _mm256_broadcast_ss(arow + 2);
      __m256 w3 = _mm256_broadcast_ss(arow + 3);
      const float* b = B + size_t(k) * ldb;
      int n = 0;
      for (; n + 8 <= N; n += 8) {
        __m256 bv = _mm256_loadu_ps(b + n);
        _mm256_storeu_ps(c0 + n, _mm256_fmadd_ps(w0, bv, _mm256_loadu_ps(c0 + n)));
        _mm256_storeu_ps(c1 + n, _mm256_fmadd_ps(w1, bv, _mm256_loadu_ps(c1 + n)));
        _mm256_storeu_ps(c2 + n, _mm256_fmadd_ps(w2, bv, _mm256_loadu_ps(c2 + n)));
        _mm256_storeu_ps(c3 + n, _mm256_fmadd_ps(w3, bv, _mm256_loadu_ps(c3 + n)));
      }
      for (; n < N; ++n) {
        float bv = b[n];
        c0[n] += arow[0] * bv;
        c1[n] += arow[1] * bv;
        c2[n] += arow[2] * bv;
        c3[n] += arow[3] * bv;
      }
    }
  }
  for (; m < M; ++m) {
    float* c0 = C + size_t(m) * ldc;
    if (!accumulate)
      for (int n = 0; n < N; ++n) c0[n] = 0.0f;
    for (int k = 0; k < K; ++k) {
      float a = A[size_t(k) * lda + m];
      __m256 w0 = _mm256_set1_ps(a);
      const float* b = B + size_t(k) * ldb;
      int n = 0;
      for (; n + 8 <= N; n += 8)
        _mm256_storeu_ps(c0 + n, _mm256_fmadd_ps(w0, _mm256_loadu_ps(b + n),
                                                 _mm256_loadu_ps(c0 + n)));
      for (; n < N; ++n) c0[n] += a * b[n];
    }
  }
}

void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B, int ldb, float* C,
             int ldc, bool accumulate) {
  for (int m = 0; m < M; ++m) {
    const float* arow = A + size_t(m) * lda;
    float* crow = C + size_t(m) * ldc;
    for (int n = 0; n < N; ++n) {
      const float* brow = B + size_t(n) * ldb;
      __m256 acc = _mm256_setzero_ps();
      int k = 0;
      for (; k + 8 <= K; k += 8)
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(arow + k), _mm256_loadu_ps(brow + k), acc);
      float s = hsum(acc);
      for (; k < K; ++k) s += arow[k] * brow[k];
      crow[n] = accumulate ? crow[n] + s : s;
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

void vadd(const float* a, const float* b, float* y, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void vadd3(const float* a, const float* b, const float* c, float* y, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 s = _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(s, _mm256_loadu_ps(c + i)));
  }
  for (; i < n; ++i) y[i] = a[i] + b[i] + c[i];
}

void vsub(const float* a, const float* b, float* y, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] - b[i];
}

void vmul(const float* a, const float* b, float* y, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

void vfma(const float* a, const float* b, float* y, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                                            _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

void axpy(float alpha, const float* x, float* y, size_t n) {
  __m256 av = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void vscale(float alpha, const float* x, float* y, size_t n) {
  __m256 av = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = alpha * x[i];
}

void vadd_const(float alpha, float* y, size_t n) {
  __m256 av = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_add_ps(av, _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha;
}

float reduce_sum(const float* x, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

float dot(const float* a, const float* b, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
  float s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gelu_fwd(const float* x, float* y, size_t n) {
  const __m256 half = _mm256_set1_ps(0.5f);
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 inv_sqrt2 = _mm256_set1_ps(0.70710678118654752f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    __m256 e = erf256(_mm256_mul_ps(v, inv_sqrt2));
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_mul_ps(half, v), _mm256_add_ps(one, e)));
  }
  if (i < n) ref::gelu_fwd(x + i, y + i, n - i);
}

void gelu_bwd(const float* x, const float* dy, float* dx, size_t n) {
  const __m256 half = _mm256_set1_ps(0.5f);
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 inv_sqrt2 = _mm256_set1_ps(0.70710678118654752f);
  const __m256 inv_sqrt2pi = _mm256_set1_ps(0.39894228040143268f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    __m256 e = erf256(_mm256_mul_ps(v, inv_sqrt2));
    __m256 cdf = _mm256_mul_ps(half, _mm256_add_ps(one, e));
    __m256 pdf = exp256(_mm256_mul_ps(_mm256_set1_ps(-0.5f), _mm256_mul_ps(v, v)));
    __m256 d = _mm256_fmadd_ps(_mm256_mul_ps(v, inv_sqrt2pi), pdf, cdf);
    _mm256_storeu_ps(dx + i, _mm256_mul_ps(_mm256_loadu_ps(dy + i), d));
  }
  if (i < n) ref::gelu_bwd(x + i, dy + i, dx + i, n - i);
}

void softmax_rows(float* x, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    float* p = x + size_t(r) * cols;
    __m256 mv = _mm256_set1_ps(-std::numeric_limits<float>::infinity());
    int j = 0;
    for (; j + 8 <= cols; j += 8) mv = _mm256_max_ps(mv, _mm256_loadu_ps(p + j));
    float m = -std::numeric_limits<float>::infinity();
    alignas(32) float tmp[8];
    _mm256_store_ps(tmp, mv);
    for (float t : tmp) m = t > m ? t : m;
    for (; j < cols; ++j) m = p[j] > m ? p[j] : m;

    __m256 msub = _mm256_set1_ps(m);
    __m256 acc = _mm256_setzero_ps();
    j = 0;
    for (; j + 8 <= cols; j += 8) {
      __m256 e = exp256(_mm256_sub_ps(_mm256_loadu_ps(p + j), msub));
      _mm256_storeu_ps(p + j, e);
      acc = _mm256_add_ps(acc, e);
    }
    float s = hsum(acc);
    for (; j < cols; ++j) {
      p[j] = std::exp(p[j] - m);
      s += p[j];
    }
    float inv = 1.0f / s;
    __m256 iv = _mm256_set1_ps(inv);
    j = 0;
    for (; j + 8 <= cols; j += 8) _mm256_storeu_ps(p + j, _mm256_mul_ps(iv, _mm256_loadu_ps(p + j)));
    for (; j < cols; ++j) p[j] *= inv;
  }
}

void softmax_over_arrays(const float* const* in, float* const* out, int E, size_t n) {
  if (E > 16) {
    ref::softmax_over_arrays(in, out, E, n);
    return;
  }
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 m = _mm256_loadu_ps(in[0] + i);
    for (int e = 1; e < E; ++e) m = _mm256_max_ps(m, _mm256_loadu_ps(in[e] + i));
    __m256 s = _mm256_setzero_ps();
    for (int e = 0; e < E; ++e) {
      __m256 v = exp256(_mm256_sub_ps(_mm256_loadu_ps(in[e] + i), m));
      _mm256_storeu_ps(out[e] + i, v);
      s = _mm256_add_ps(s, v);
    }
    __m256 inv = _mm256_div_ps(_mm256_set1_ps(1.0f), s);
    for (int e = 0; e < E; ++e)
      _mm256_storeu_ps(out[e] + i, _mm256_mul_ps(inv, _mm256_loadu_ps(out[e] + i)));
  }
  if (i < n) {
    const float* tail_in[16];
    float* tail_out[16];
    for (int e = 0; e < E; ++e) {
      tail_in[e] = in[e] + i;
      tail_out[e] = out[e] + i;
    }
    ref::softmax_over_arrays(tail_in, tail_out, E, n - i);
  }
}

void adam_step(float* w, const float* g, float* m, float* v, size_t n, float lr, float beta1,
               float beta2, float eps, float bc1, float bc2) {
  const __m256 b1 = _mm256_set1_ps(beta1);
  const __m256 b2 = _mm256_set1_ps(beta2);
  const __m256 ob1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 ob2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 ibc1 = _mm256_set1_ps(1.0f / bc1);
  const __m256 ibc2 = _mm256_set1_ps(1.0f / bc2);
  const __m256 lrv = _mm256_set1_ps(lr);
  const __m256 epsv = _mm256_set1_ps(eps);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 gi = _mm256_loadu_ps(g + i);
    __m256 mi = _mm256_fmadd_ps(b1, _mm256_loadu_ps(m + i), _mm256_mul_ps(ob1, gi));
    __m256 vi = _mm256_fmadd_ps(b2, _mm256_loadu_ps(v + i), _mm256_mul_ps(ob2, _mm256_mul_ps(gi, gi)));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    __m256 mhat = _mm256_mul_ps(mi, ibc1);
    __m256 vhat = _mm256_mul_ps(vi, ibc2);
    __m256 upd = _mm256_div_ps(_mm256_mul_ps(lrv, mhat),
                               _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv));
    _mm256_storeu_ps(w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), upd));
  }
  if (i < n) ref::adam_step(w + i, g + i, m + i, v + i, n - i, lr, beta1, beta2, eps, bc1, bc2);
}

// ---------------------------------------------------------------------------
// Layer-norm helpers
// ---------------------------------------------------------------------------

void ln_acc_moments(const float* x, float* sum, float* sumsq, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    _mm256_storeu_ps(sum + i, _mm256_add_ps(_mm256_loadu_ps(sum + i), v));
    _mm256_storeu_ps(sumsq + i, _mm256_fmadd_ps(v, v, _mm256_loadu_ps(sumsq + i)));
  }
  if (i < n) ref::ln_acc_moments(x + i, sum + i, sumsq + i, n - i);
}

void ln_finalize(const float* sum, const float* sumsq, float inv_c, float eps, float* mean,
                 float* inv_std, size_t n) {
  const __m256 ic = _mm256_set1_ps(inv_c);
  const __m256 ev = _mm256_set1_ps(eps);
  const __m256 zero = _mm256_setzero_ps();
  const __m256 one = _mm256_set1_ps(1.0f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 mu = _mm256_mul_ps(_mm256_loadu_ps(sum + i), ic);
    __m256 var = _mm256_fnmadd_ps(mu, mu, _mm256_mul_ps(_mm256_loadu_ps(sumsq + i), ic));
    var = _mm256_max_ps(var, zero);
    _mm256_storeu_ps(mean + i, mu);
    _mm256_storeu_ps(inv_std + i, _mm256_div_ps(one, _mm256_sqrt_ps(_mm256_add_ps(var, ev))));
  }
  if (i < n) ref::ln_finalize(sum + i, sumsq + i, inv_c, eps, mean + i, inv_std + i, n - i);
}

void ln_apply(const float* x, const float* mean, const float* inv_std, float gamma, float beta,
              float* y, size_t n) {
  const __m256 gv = _mm256_set1_ps(gamma);
  const __m256 bv = _mm256_set1_ps(beta);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 xhat = _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(mean + i)),
                                _mm256_loadu_ps(inv_std + i));
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(gv, xhat, bv));
  }
  if (i < n) ref::ln_apply(x + i, mean + i, inv_std + i, gamma, beta, y + i, n - i);
}

void ln_bwd_acc(const float* dy, const float* x, const float* mean, const float* inv_std,
                float gamma, float* t1, float* t2, size_t n) {
  const __m256 gv = _mm256_set1_ps(gamma);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 gd = _mm256_mul_ps(gv, _mm256_loadu_ps(dy + i));
    __m256 xhat = _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(mean + i)),
                                _mm256_loadu_ps(inv_std + i));
    _mm256_storeu_ps(t1 + i, _mm256_add_ps(_mm256_loadu_ps(t1 + i), gd));
    _mm256_storeu_ps(t2 + i, _mm256_fmadd_ps(gd, xhat, _mm256_loadu_ps(t2 + i)));
  }
  if (i < n) ref::ln_bwd_acc(dy + i, x + i, mean + i, inv_std + i, gamma, t1 + i, t2 + i, n - i);
}

void ln_bwd_dx(const float* dy, const float* x, const float* mean, const float* inv_std,
               float gamma, const float* t1, const float* t2, float inv_c, float* dx, size_t n) {
  const __m256 gv = _mm256_set1_ps(gamma);
  const __m256 icv = _mm256_set1_ps(inv_c);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 is = _mm256_loadu_ps(inv_std + i);
    __m256 xhat = _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(mean + i)), is);
    __m256 inner = _mm256_fmadd_ps(xhat, _mm256_loadu_ps(t2 + i), _mm256_loadu_ps(t1 + i));
    __m256 core = _mm256_fnmadd_ps(icv, inner, _mm256_mul_ps(gv, _mm256_loadu_ps(dy + i)));
    _mm256_storeu_ps(dx + i, _mm256_mul_ps(is, core));
  }
  if (i < n)
    ref::ln_bwd_dx(dy + i, x + i, mean + i, inv_std + i, gamma, t1 + i, t2 + i, inv_c, dx + i,
                   n - i);
}

void ln_param_grad(const float* dy, const float* x, const float* mean, const float* inv_std,
                   size_t n, float* dgamma, float* dbeta) {
  __m256 dg = _mm256_setzero_ps();
  __m256 db = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 d = _mm256_loadu_ps(dy + i);
    __m256 xhat = _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(mean + i)),
                                _mm256_loadu_ps(inv_std + i));
    dg = _mm256_fmadd_ps(d, xhat, dg);
    db = _mm256_add_ps(db, d);
  }
  float sg = hsum(dg), sb = hsum(db);
  for (; i < n; ++i) {
    sg += dy[i] * (x[i] - mean[i]) * inv_std[i];
    sb += dy[i];
  }
  *dgamma += sg;
  *dbeta += sb;
}

// ---------------------------------------------------------------------------
// Depth-wise conv: per-tap shifted axpy over rows.
// ---------------------------------------------------------------------------

void dwconv_plane_fwd(const float* in, int H, int W, const float* w, int k, float bias,
                      float* out) {
  int p = k / 2;
  for (size_t i = 0, e = size_t(H) * W; i < e; ++i) out[i] = bias;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      float wv = w[i * k + j];
      int dy = i - p, dx = j - p;
      int y0 = dy < 0 ? -dy : 0;
      int y1 = dy > 0 ? H - dy : H;
      int x0 = dx < 0 ? -dx : 0;
      int x1 = dx > 0 ? W - dx : W;
      if (x1 <= x0) continue;
      for (int y = y0; y < y1; ++y) {
        float* orow = out + size_t(y) * W;
        const float* irow = in + size_t(y + dy) * W + dx;
        axpy(wv, irow + x0, orow + x0, size_t(x1 - x0));
      }
    }
  }
}

void dwconv_plane_bwd_data(const float* dout, int H, int W, const float* w, int k, float* din) {
  int p = k / 2;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      float wv = w[i * k + j];
      // din[y][x] += w * dout[y - (i-p)][x - (j-p)]
      int dy = p - i, dx = p - j;
      int y0 = dy < 0 ? -dy : 0;
      int y1 = dy > 0 ? H - dy : H;
      int x0 = dx < 0 ? -dx : 0;
      int x1 = dx > 0 ? W - dx : W;
      if (x1 <= x0) continue;
      for (int y = y0; y < y1; ++y) {
        float* drow = din + size_t(y) * W;
        const float* orow = dout + size_t(y + dy) * W + dx;
        axpy(wv, orow + x0, drow + x0, size_t(x1 - x0));
      }
    }
  }
}

void dwconv_plane_bwd_w(const float* dout, const float* in, int H, int W, int k, float* dw) {
  int p = k / 2;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      int dy = i - p, dx = j - p;
      int y0 = dy < 0 ? -dy : 0;
      int y1 = dy > 0 ? H - dy : H;
      int x0 = dx < 0 ? -dx : 0;
      int x1 = dx > 0 ? W - dx : W;
      if (x1 <= x0) continue;
      float acc = 0.0f;
      for (int y = y0; y < y1; ++y)
        acc += dot(dout + size_t(y) * W + x0, in + size_t(y + dy) * W + dx + x0, size_t(x1 - x0));
      dw[i * k + j] += acc;
    }
  }
}

}  // namespace

const FloatTable& avx2_float_table() {
  static const FloatTable t = {
      gemm_nn,       gemm_nt,    gemm_tn,      vadd,        vadd3,
      vsub,          vmul,       vfma,         axpy,        vscale,
      vadd_const,    reduce_sum, dot,          gelu_fwd,    gelu_bwd,
      softmax_rows,  softmax_over_arrays,      adam_step,   ln_acc_moments,
      ln_finalize,   ln_apply,   ln_bwd_acc,   ln_bwd_dx,   ln_param_grad,
      dwconv_plane_fwd, dwconv_plane_bwd_data, dwconv_plane_bwd_w,
  };
  return t;
}

}  // namespace ssiu::kernels
