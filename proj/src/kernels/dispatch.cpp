// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "kernels_ref.hpp"
#include "kernels_table.hpp"

namespace ssiu::kernels {

namespace r = ref;

const FloatTable& scalar_float_table() {
  static const FloatTable t = {
      r::gemm_nn<float>,     r::gemm_nt<float>,   r::gemm_tn<float>,
      r::vadd<float>,        r::vadd3<float>,     r::vsub<float>,
      r::vmul<float>,        r::vfma<float>,      r::axpy<float>,
      r::vscale<float>,      r::vadd_const<float>, r::reduce_sum<float>,
      r::dot<float>,         r::gelu_fwd<float>,  r::gelu_bwd<float>,
      r::softmax_rows<float>, r::softmax_over_arrays<float>, r::adam_step<float>,
      r::ln_acc_moments<float>, r::ln_finalize<float>, r::ln_apply<float>,
      r::ln_bwd_acc<float>,  r::ln_bwd_dx<float>, r::ln_param_grad<float>,
      r::dwconv_plane_fwd<float>, r::dwconv_plane_bwd_data<float>, r::dwconv_plane_bwd_w<float>,
  };
  return t;
}

bool avx2_supported() {
#if defined(SSIU_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend pick_initial_backend() {
  if (const char* env = std::getenv("SSIU_KERNEL_BACKEND")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::avx2;
    if (std::strcmp(env, "avx2") == 0) return Backend::scalar;  // requested but unavailable
  }
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<const FloatTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const FloatTable* table_for(Backend b) {
#ifdef SSIU_HAVE_AVX2
  if (b == Backend::avx2) return &avx2_float_table();
#endif
  return &scalar_float_table();
}

const FloatTable& ft() {
  const FloatTable* t = g_table.load(std::memory_order_acquire);
  if (!t) {
    Backend b = pick_initial_backend();
    g_backend.store(b, std::memory_order_relaxed);
    t = table_for(b);
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

Backend active_backend() {
  ft();
  return g_backend.load(std::memory_order_relaxed);
}

void set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported())
    throw std::invalid_argument("avx2 backend not supported on this CPU/build");
  g_backend.store(b, std::memory_order_relaxed);
  g_table.store(table_for(b), std::memory_order_release);
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

// ---------------------------------------------------------------------------
// Public API: float goes through the table, double through the reference.
// ---------------------------------------------------------------------------

template <>
void gemm_nn<float>(int M, int N, int K, const float* A, int lda, const float* B, int ldb,
                    float* C, int ldc, bool acc) {
  ft().gemm_nn(M, N, K, A, lda, B, ldb, C, ldc, acc);
}
template <>
void gemm_nn<double>(int M, int N, int K, const double* A, int lda, const double* B, int ldb,
                     double* C, int ldc, bool acc) {
  r::gemm_nn(M, N, K, A, lda, B, ldb, C, ldc, acc);
}
template <>
void gemm_nt<float>(int M, int N, int K, const float* A, int lda, const float* B, int ldb,
                    float* C, int ldc, bool acc) {
  ft().gemm_nt(M, N, K, A, lda, B, ldb, C, ldc, acc);
}
template <>
void gemm_nt<double>(int M, int N, int K, const double* A, int lda, const double* B, int ldb,
                     double* C, int ldc, bool acc) {
  r::gemm_nt(M, N, K, A, lda, B, ldb, C, ldc, acc);
}
template <>
void gemm_tn<float>(int M, int N, int K, const float* A, int lda, const float* B, int ldb,
                    float* C, int ldc, bool acc) {
  ft().gemm_tn(M, N, K, A, lda, B, ldb, C, ldc, acc);
}
template <>
void gemm_tn<double>(int M, int N, int K, const double* A, int lda, const double* B, int ldb,
                     double* C, int ldc, bool acc) {
  r::gemm_tn(M, N, K, A, lda, B, ldb, C, ldc, acc);
}

template <> void vadd<float>(const float* a, const float* b, float* y, size_t n) {
  ft().vadd(a, b, y, n);
}
template <> void vadd<double>(const double* a, const double* b, double* y, size_t n) {
  r::vadd(a, b, y, n);
}
template <> void vadd3<float>(const float* a, const float* b, const float* c, float* y, size_t n) {
  ft().vadd3(a, b, c, y, n);
}
template <>
void vadd3<double>(const double* a, const double* b, const double* c, double* y, size_t n) {
  r::vadd3(a, b, c, y, n);
}
template <> void vsub<float>(const float* a, const float* b, float* y, size_t n) {
  ft().vsub(a, b, y, n);
}
template <> void vsub<double>(const double* a, const double* b, double* y, size_t n) {
  r::vsub(a, b, y, n);
}
template <> void vmul<float>(const float* a, const float* b, float* y, size_t n) {
  ft().vmul(a, b, y, n);
}
template <> void vmul<double>(const double* a, const double* b, double* y, size_t n) {
  r::vmul(a, b, y, n);
}
template <> void vfma<float>(const float* a, const float* b, float* y, size_t n) {
  ft().vfma(a, b, y, n);
}
template <> void vfma<double>(const double* a, const double* b, double* y, size_t n) {
  r::vfma(a, b, y, n);
}
template <> void axpy<float>(float alpha, const float* x, float* y, size_t n) {
  ft().axpy(alpha, x, y, n);
}
template <> void axpy<double>(double alpha, const double* x, double* y, size_t n) {
  r::axpy(alpha, x, y, n);
}
template <> void vscale<float>(float alpha, const float* x, float* y, size_t n) {
  ft().vscale(alpha, x, y, n);
}
template <> void vscale<double>(double alpha, const double* x, double* y, size_t n) {
  r::vscale(alpha, x, y, n);
}
template <> void vadd_const<float>(float alpha, float* y, size_t n) { ft().vadd_const(alpha, y, n); }
template <> void vadd_const<double>(double alpha, double* y, size_t n) { r::vadd_const(alpha, y, n); }
template <> float reduce_sum<float>(const float* x, size_t n) { return ft().reduce_sum(x, n); }
template <> double reduce_sum<double>(const double* x, size_t n) { return r::reduce_sum(x, n); }
template <> float dot<float>(const float* a, const float* b, size_t n) { return ft().dot(a, b, n); }
template <> double dot<double>(const double* a, const double* b, size_t n) {
  return r::dot(a, b, n);
}
template <> void gelu_fwd<float>(const float* x, float* y, size_t n) { ft().gelu_fwd(x, y, n); }
template <> void gelu_fwd<double>(const double* x, double* y, size_t n) { r::gelu_fwd(x, y, n); }
template <> void gelu_bwd<float>(const float* x, const float* dy, float* dx, size_t n) {
  ft().gelu_bwd(x, dy, dx, n);
}
template <> void gelu_bwd<double>(const double* x, const double* dy, double* dx, size_t n) {
  r::gelu_bwd(x, dy, dx, n);
}
template <> void softmax_rows<float>(float* x, int rows, int cols) {
  ft().softmax_rows(x, rows, cols);
}
template <> void softmax_rows<double>(double* x, int rows, int cols) {
  r::softmax_rows(x, rows, cols);
}
template <>
void softmax_over_arrays<float>(const float* const* in, float* const* out, int E, size_t n) {
  ft().softmax_over_arrays(in, out, E, n);
}
template <>
void softmax_over_arrays<double>(const double* const* in, double* const* out, int E, size_t n) {
  r::softmax_over_arrays(in, out, E, n);
}
template <>
void adam_step<float>(float* w, const float* g, float* m, float* v, size_t n, float lr,
                      float beta1, float beta2, float eps, float bc1, float bc2) {
  ft().adam_step(w, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
}
template <>
void adam_step<double>(double* w, const double* g, double* m, double* v, size_t n, double lr,
                       double beta1, double beta2, double eps, double bc1, double bc2) {
  r::adam_step(w, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
}
template <> void ln_acc_moments<float>(const float* x, float* sum, float* sumsq, size_t n) {
  ft().ln_acc_moments(x, sum, sumsq, n);
}
template <> void ln_acc_moments<double>(const double* x, double* sum, double* sumsq, size_t n) {
  r::ln_acc_moments(x, sum, sumsq, n);
}
template <>
void ln_finalize<float>(const float* sum, const float* sumsq, float inv_c, float eps, float* mean,
                        float* inv_std, size_t n) {
  ft().ln_finalize(sum, sumsq, inv_c, eps, mean, inv_std, n);
}
template <>
void ln_finalize<double>(const double* sum, const double* sumsq, double inv_c, double eps,
                         double* mean, double* inv_std, size_t n) {
  r::ln_finalize(sum, sumsq, inv_c, eps, mean, inv_std, n);
}
template <>
void ln_apply<float>(const float* x, const float* mean, const float* inv_std, float gamma,
                     float beta, float* y, size_t n) {
  ft().ln_apply(x, mean, inv_std, gamma, beta, y, n);
}
template <>
void ln_apply<double>(const double* x, const double* mean, const double* inv_std, double gamma,
                      double beta, double* y, size_t n) {
  r::ln_apply(x, mean, inv_std, gamma, beta, y, n);
}
template <>
void ln_bwd_acc<float>(const float* dy, const float* x, const float* mean, const float* inv_std,
                       float gamma, float* t1, float* t2, size_t n) {
  ft().ln_bwd_acc(dy, x, mean, inv_std, gamma, t1, t2, n);
}
template <>
void ln_bwd_acc<double>(const double* dy, const double* x, const double* mean,
                        const double* inv_std, double gamma, double* t1, double* t2, size_t n) {
  r::ln_bwd_acc(dy, x, mean, inv_std, gamma, t1, t2, n);
}
template <>
void ln_bwd_dx<float>(const float* dy, const float* x, const float* mean, const float* inv_std,
                      float gamma, const float* t1, const float* t2, float inv_c, float* dx,
                      size_t n) {
  ft().ln_bwd_dx(dy, x, mean, inv_std, gamma, t1, t2, inv_c, dx, n);
}
template <>
void ln_bwd_dx<double>(const double* dy, const double* x, const double* mean,
                       const double* inv_std, double gamma, const double* t1, const double* t2,
                       double inv_c, double* dx, size_t n) {
  r::ln_bwd_dx(dy, x, mean, inv_std, gamma, t1, t2, inv_c, dx, n);
}
template <>
void ln_param_grad<float>(const float* dy, const float* x, const float* mean,
                          const float* inv_std, size_t n, float* dgamma, float* dbeta) {
  ft().ln_param_grad(dy, x, mean, inv_std, n, dgamma, dbeta);
}
template <>
void ln_param_grad<double>(const double* dy, const double* x, const double* mean,
                           const double* inv_std, size_t n, double* dgamma, double* dbeta) {
  r::ln_param_grad(dy, x, mean, inv_std, n, dgamma, dbeta);
}
template <>
void dwconv_plane_fwd<float>(const float* in, int H, int W, const float* w, int k, float bias,
                             float* out) {
  ft().dwconv_plane_fwd(in, H, W, w, k, bias, out);
}
template <>
void dwconv_plane_fwd<double>(const double* in, int H, int W, const double* w, int k, double bias,
                              double* out) {
  r::dwconv_plane_fwd(in, H, W, w, k, bias, out);
}
template <>
void dwconv_plane_bwd_data<float>(const float* dout, int H, int W, const float* w, int k,
                                  float* din) {
  ft().dwconv_plane_bwd_data(dout, H, W, w, k, din);
}
template <>
void dwconv_plane_bwd_data<double>(const double* dout, int H, int W, const double* w, int k,
                                   double* din) {
  r::dwconv_plane_bwd_data(dout, H, W, w, k, din);
}
template <>
void dwconv_plane_bwd_w<float>(const float* dout, const float* in, int H, int W, int k,
                               float* dw) {
  ft().dwconv_plane_bwd_w(dout, in, H, W, k, dw);
}
template <>
void dwconv_plane_bwd_w<double>(const double* dout, const double* in, int H, int W, int k,
                                double* dw) {
  r::dwconv_plane_bwd_w(dout, in, H, W, k, dw);
}

}  // namespace ssiu::kernels
