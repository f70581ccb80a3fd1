// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops behind all tensor operations. Every kernel has a
// scalar reference implementation; hot float kernels additionally have an
// AVX2 variant selected at runtime (overridable via SSIU_KERNEL_BACKEND or
// set_backend). The double-precision path always uses the scalar reference;
// it exists for high-accuracy oracles and gradient checks, not speed.
//
// Determinism contract: for a fixed backend, every kernel produces
// bit-identical output regardless of thread count; accumulation orders are
// fixed per output element.

#pragma once

#include <cstddef>
#include <cstdint>

namespace ssiu::kernels {

enum class Backend { scalar, avx2 };

bool avx2_supported();
Backend active_backend();
// Throws std::invalid_argument if the backend is not supported on this CPU.
void set_backend(Backend b);
const char* backend_name(Backend b);

// ---------------------------------------------------------------------------
// GEMM, row-major, C is MxN with leading dimension ldc.
//   gemm_nn: C (+)= A[MxK] * B[KxN]
//   gemm_nt: C (+)= A[MxK] * B[NxK]^T
//   gemm_tn: C (+)= A[KxM]^T * B[KxN]
// ---------------------------------------------------------------------------
template <class T>
void gemm_nn(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc,
             bool accumulate);
template <class T>
void gemm_nt(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc,
             bool accumulate);
template <class T>
void gemm_tn(int M, int N, int K, const T* A, int lda, const T* B, int ldb, T* C, int ldc,
             bool accumulate);

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------
template <class T> void vadd(const T* a, const T* b, T* y, size_t n);         // y = a + b
template <class T> void vadd3(const T* a, const T* b, const T* c, T* y, size_t n);
template <class T> void vsub(const T* a, const T* b, T* y, size_t n);         // y = a - b
template <class T> void vmul(const T* a, const T* b, T* y, size_t n);         // y = a * b
template <class T> void vfma(const T* a, const T* b, T* y, size_t n);         // y += a * b
template <class T> void axpy(T alpha, const T* x, T* y, size_t n);            // y += alpha * x
template <class T> void vscale(T alpha, const T* x, T* y, size_t n);          // y = alpha * x
template <class T> void vadd_const(T alpha, T* y, size_t n);                  // y += alpha
template <class T> T reduce_sum(const T* x, size_t n);
template <class T> T dot(const T* a, const T* b, size_t n);

// Exact (erf-based) GELU. The AVX2 variant evaluates erf with a polynomial
// accurate to ~2e-7 absolute; equivalence tests budget for that.
template <class T> void gelu_fwd(const T* x, T* y, size_t n);
template <class T> void gelu_bwd(const T* x, const T* dy, T* dx, size_t n);   // dx = dy * gelu'(x)

// In-place row-wise softmax over a [rows x cols] matrix (row stride = cols).
template <class T> void softmax_rows(T* x, int rows, int cols);

// Softmax across E parallel arrays, elementwise: out[e][i] = softmax over e
// of in[.][i]. Used by the expert gate.
template <class T> void softmax_over_arrays(const T* const* in, T* const* out, int E, size_t n);

// Adam update with precomputed bias corrections bc1 = 1-beta1^t, bc2 = 1-beta2^t.
template <class T>
void adam_step(T* w, const T* g, T* m, T* v, size_t n, T lr, T beta1, T beta2, T eps, T bc1,
               T bc2);

// ---------------------------------------------------------------------------
// Channel layer-norm helpers. Stats arrays have one entry per spatial
// position of a plane; planes are accumulated one at a time so all access is
// contiguous.
// ---------------------------------------------------------------------------
template <class T> void ln_acc_moments(const T* x, T* sum, T* sumsq, size_t n);
template <class T>
void ln_finalize(const T* sum, const T* sumsq, T inv_c, T eps, T* mean, T* inv_std, size_t n);
template <class T>
void ln_apply(const T* x, const T* mean, const T* inv_std, T gamma, T beta, T* y, size_t n);
template <class T>
void ln_bwd_acc(const T* dy, const T* x, const T* mean, const T* inv_std, T gamma, T* t1, T* t2,
                size_t n);
template <class T>
void ln_bwd_dx(const T* dy, const T* x, const T* mean, const T* inv_std, T gamma, const T* t1,
               const T* t2, T inv_c, T* dx, size_t n);
template <class T>
void ln_param_grad(const T* dy, const T* x, const T* mean, const T* inv_std, size_t n, T* dgamma,
                   T* dbeta);

// ---------------------------------------------------------------------------
// Depth-wise convolution on a single plane, odd kernel k, zero padding
// k/2 (same-size output). Weight is kxk row-major.
// ---------------------------------------------------------------------------
template <class T>
void dwconv_plane_fwd(const T* in, int H, int W, const T* w, int k, T bias, T* out);
template <class T>
void dwconv_plane_bwd_data(const T* dout, int H, int W, const T* w, int k, T* din);  // din +=
template <class T>
void dwconv_plane_bwd_w(const T* dout, const T* in, int H, int W, int k, T* dw);     // dw +=

}  // namespace ssiu::kernels
