// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Equivalence tests between the scalar reference kernels and the runtime-
// selected SIMD variants. Tolerances budget for FMA re-association and the
// polynomial exp/erf in the AVX2 path.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ssiu/core/rng.hpp"
#include "ssiu/kernels/kernels.hpp"

using namespace ssiu;
namespace k = ssiu::kernels;

namespace {

bool have_both_backends() { return k::avx2_supported(); }

struct BackendGuard {
  k::Backend saved;
  BackendGuard() : saved(k::active_backend()) {}
  ~BackendGuard() { k::set_backend(saved); }
};

std::vector<float> random_vec(size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::vector<float> v(n);
  for (auto& x : v) x = float(rng.uniform(lo, hi));
  return v;
}

double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
}

double max_rel(const std::vector<float>& a, const std::vector<float>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, rel_diff(a[i], b[i]));
  return m;
}

}  // namespace

TEST_CASE("backend selection is reported and switchable") {
  BackendGuard guard;
  k::set_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  if (k::avx2_supported()) {
    k::set_backend(k::Backend::avx2);
    CHECK(k::active_backend() == k::Backend::avx2);
  } else {
    CHECK_THROWS_AS(k::set_backend(k::Backend::avx2), std::invalid_argument);
  }
}

TEST_CASE("gemm variants match the scalar reference") {
  if (!have_both_backends()) {
    SUCCEED("no SIMD backend on this host");
    return;
  }
  BackendGuard guard;
  Rng rng(42);
  for (auto [M, N, K] : {std::tuple{4, 64, 16},
                         std::tuple{17, 61, 33},
                         std::tuple{64, 4096, 32},
                         std::tuple{1, 7, 5},
                         std::tuple{33, 129, 64}}) {
    std::vector<float> A = random_vec(size_t(std::max(M, K)) * std::max(M, K) * 4, rng);
    std::vector<float> B = random_vec(size_t(std::max(K, N)) * std::max(K, N) * 4, rng);
    for (int variant = 0; variant < 3; ++variant) {
      for (bool acc : {false, true}) {
        std::vector<float> C0 = random_vec(size_t(M) * N, rng);
        std::vector<float> C1 = C0;
        auto run = [&](std::vector<float>& C) {
          if (variant == 0) k::gemm_nn(M, N, K, A.data(), K, B.data(), N, C.data(), N, acc);
          if (variant == 1) k::gemm_nt(M, N, K, A.data(), K, B.data(), K, C.data(), N, acc);
          if (variant == 2) k::gemm_tn(M, N, K, A.data(), M, B.data(), N, C.data(), N, acc);
        };
        k::set_backend(k::Backend::scalar);
        run(C0);
        k::set_backend(k::Backend::avx2);
        run(C1);
        INFO("variant " << variant << " M" << M << " N" << N << " K" << K << " acc " << acc);
        CHECK(max_rel(C0, C1) < 2e-5);
      }
    }
  }
}

TEST_CASE("elementwise kernels match the scalar reference") {
  if (!have_both_backends()) {
    SUCCEED("no SIMD backend on this host");
    return;
  }
  BackendGuard guard;
  Rng rng(7);
  size_t n = 1003;  // odd length exercises the tails
  auto a = random_vec(n, rng), b = random_vec(n, rng), c = random_vec(n, rng);

  auto compare = [&](auto&& fn) {
    std::vector<float> y0 = random_vec(n, rng);
    std::vector<float> y1 = y0;
    k::set_backend(k::Backend::scalar);
    fn(y0);
    k::set_backend(k::Backend::avx2);
    fn(y1);
    CHECK(max_rel(y0, y1) < 1e-6);
  };

  compare([&](std::vector<float>& y) { k::vadd(a.data(), b.data(), y.data(), n); });
  compare([&](std::vector<float>& y) { k::vadd3(a.data(), b.data(), c.data(), y.data(), n); });
  compare([&](std::vector<float>& y) { k::vsub(a.data(), b.data(), y.data(), n); });
  compare([&](std::vector<float>& y) { k::vmul(a.data(), b.data(), y.data(), n); });
  compare([&](std::vector<float>& y) { k::vfma(a.data(), b.data(), y.data(), n); });
  compare([&](std::vector<float>& y) { k::axpy(0.37f, a.data(), y.data(), n); });
  compare([&](std::vector<float>& y) { k::vscale(1.61f, a.data(), y.data(), n); });
  compare([&](std::vector<float>& y) { k::vadd_const(-0.21f, y.data(), n); });

  k::set_backend(k::Backend::scalar);
  float s0 = k::reduce_sum(a.data(), n);
  float d0 = k::dot(a.data(), b.data(), n);
  k::set_backend(k::Backend::avx2);
  float s1 = k::reduce_sum(a.data(), n);
  float d1 = k::dot(a.data(), b.data(), n);
  CHECK(rel_diff(s0, s1) < 1e-4);
  CHECK(rel_diff(d0, d1) < 1e-4);
}

TEST_CASE("gelu and softmax match within the polynomial budget") {
  if (!have_both_backends()) {
    SUCCEED("no SIMD backend on this host");
    return;
  }
  BackendGuard guard;
  Rng rng(11);
  size_t n = 2049;
  auto x = random_vec(n, rng, -6.0, 6.0);
  auto dy = random_vec(n, rng);

  std::vector<float> y0(n), y1(n), g0(n), g1(n);
  k::set_backend(k::Backend::scalar);
  k::gelu_fwd(x.data(), y0.data(), n);
  k::gelu_bwd(x.data(), dy.data(), g0.data(), n);
  k::set_backend(k::Backend::avx2);
  k::gelu_fwd(x.data(), y1.data(), n);
  k::gelu_bwd(x.data(), dy.data(), g1.data(), n);
  for (size_t i = 0; i < n; ++i) {
    CHECK(std::fabs(y0[i] - y1[i]) < 2e-6);
    CHECK(std::fabs(g0[i] - g1[i]) < 5e-6);
  }

  int rows = 37, cols = 64;
  auto sm = random_vec(size_t(rows) * cols, rng, -8.0, 8.0);
  std::vector<float> sm0 = sm, sm1 = sm;
  k::set_backend(k::Backend::scalar);
  k::softmax_rows(sm0.data(), rows, cols);
  k::set_backend(k::Backend::avx2);
  k::softmax_rows(sm1.data(), rows, cols);
  for (size_t i = 0; i < sm.size(); ++i) CHECK(std::fabs(sm0[i] - sm1[i]) < 2e-6);

  // Row sums are 1 for both backends.
  for (int r = 0; r < rows; ++r) {
    double s = 0;
    for (int j = 0; j < cols; ++j) s += sm1[size_t(r) * cols + j];
    CHECK(std::fabs(s - 1.0) < 1e-5);
  }
}

TEST_CASE("softmax over arrays, adam and layer-norm helpers agree") {
  if (!have_both_backends()) {
    SUCCEED("no SIMD backend on this host");
    return;
  }
  BackendGuard guard;
  Rng rng(23);
  size_t n = 777;
  int E = 3;
  std::vector<std::vector<float>> in(E), out0(E), out1(E);
  std::vector<const float*> ip(E);
  std::vector<float*> op(E);
  for (int e = 0; e < E; ++e) {
    in[e] = random_vec(n, rng, -5.0, 5.0);
    out0[e].resize(n);
    out1[e].resize(n);
    ip[e] = in[e].data();
  }
  for (int e = 0; e < E; ++e) op[e] = out0[e].data();
  k::set_backend(k::Backend::scalar);
  k::softmax_over_arrays(ip.data(), op.data(), E, n);
  for (int e = 0; e < E; ++e) op[e] = out1[e].data();
  k::set_backend(k::Backend::avx2);
  k::softmax_over_arrays(ip.data(), op.data(), E, n);
  for (int e = 0; e < E; ++e)
    for (size_t i = 0; i < n; ++i) CHECK(std::fabs(out0[e][i] - out1[e][i]) < 2e-6);

  // adam
  auto w = random_vec(n, rng), g = random_vec(n, rng), m = random_vec(n, rng, 0, 0.1),
       v = random_vec(n, rng, 0, 0.1);
  auto w1 = w, g1 = g, m1 = m, v1 = v;
  k::set_backend(k::Backend::scalar);
  k::adam_step(w.data(), g.data(), m.data(), v.data(), n, 1e-3f, 0.9f, 0.999f, 1e-8f, 0.1f,
               0.001f);
  k::set_backend(k::Backend::avx2);
  k::adam_step(w1.data(), g1.data(), m1.data(), v1.data(), n, 1e-3f, 0.9f, 0.999f, 1e-8f, 0.1f,
               0.001f);
  CHECK(max_rel(w, w1) < 1e-5);
  CHECK(max_rel(m, m1) < 1e-5);
  CHECK(max_rel(v, v1) < 1e-5);

  // layer norm chain
  auto x = random_vec(n, rng);
  auto dy = random_vec(n, rng);
  std::vector<float> sum0(n, 0.1f), sq0(n, 0.2f), sum1 = sum0, sq1 = sq0;
  k::set_backend(k::Backend::scalar);
  k::ln_acc_moments(x.data(), sum0.data(), sq0.data(), n);
  k::set_backend(k::Backend::avx2);
  k::ln_acc_moments(x.data(), sum1.data(), sq1.data(), n);
  CHECK(max_rel(sum0, sum1) < 1e-6);
  CHECK(max_rel(sq0, sq1) < 1e-6);

  std::vector<float> mean0(n), is0(n), mean1(n), is1(n);
  k::set_backend(k::Backend::scalar);
  k::ln_finalize(sum0.data(), sq0.data(), 1.0f / 32, 1e-6f, mean0.data(), is0.data(), n);
  k::set_backend(k::Backend::avx2);
  k::ln_finalize(sum1.data(), sq1.data(), 1.0f / 32, 1e-6f, mean1.data(), is1.data(), n);
  CHECK(max_rel(mean0, mean1) < 1e-5);
  CHECK(max_rel(is0, is1) < 1e-4);

  std::vector<float> y0(n), y1(n);
  k::set_backend(k::Backend::scalar);
  k::ln_apply(x.data(), mean0.data(), is0.data(), 1.3f, -0.2f, y0.data(), n);
  k::set_backend(k::Backend::avx2);
  k::ln_apply(x.data(), mean1.data(), is1.data(), 1.3f, -0.2f, y1.data(), n);
  CHECK(max_rel(y0, y1) < 1e-4);

  float dg0 = 0, db0 = 0, dg1 = 0, db1 = 0;
  k::set_backend(k::Backend::scalar);
  k::ln_param_grad(dy.data(), x.data(), mean0.data(), is0.data(), n, &dg0, &db0);
  k::set_backend(k::Backend::avx2);
  k::ln_param_grad(dy.data(), x.data(), mean1.data(), is1.data(), n, &dg1, &db1);
  CHECK(rel_diff(dg0, dg1) < 1e-3);
  CHECK(rel_diff(db0, db1) < 1e-3);
}

TEST_CASE("depthwise conv kernels match the scalar reference") {
  if (!have_both_backends()) {
    SUCCEED("no SIMD backend on this host");
    return;
  }
  BackendGuard guard;
  Rng rng(31);
  for (auto [H, W, ksz] : {std::tuple{17, 23, 3}, std::tuple{8, 8, 5}, std::tuple{5, 31, 3}}) {
    auto in = random_vec(size_t(H) * W, rng);
    auto wgt = random_vec(size_t(ksz) * ksz, rng);
    auto dout = random_vec(size_t(H) * W, rng);

    std::vector<float> o0(size_t(H) * W), o1(size_t(H) * W);
    k::set_backend(k::Backend::scalar);
    k::dwconv_plane_fwd(in.data(), H, W, wgt.data(), ksz, 0.17f, o0.data());
    k::set_backend(k::Backend::avx2);
    k::dwconv_plane_fwd(in.data(), H, W, wgt.data(), ksz, 0.17f, o1.data());
    CHECK(max_rel(o0, o1) < 1e-5);

    std::vector<float> di0(size_t(H) * W, 0.f), di1 = di0;
    k::set_backend(k::Backend::scalar);
    k::dwconv_plane_bwd_data(dout.data(), H, W, wgt.data(), ksz, di0.data());
    k::set_backend(k::Backend::avx2);
    k::dwconv_plane_bwd_data(dout.data(), H, W, wgt.data(), ksz, di1.data());
    CHECK(max_rel(di0, di1) < 1e-5);

    std::vector<float> dw0(size_t(ksz) * ksz, 0.f), dw1 = dw0;
    k::set_backend(k::Backend::scalar);
    k::dwconv_plane_bwd_w(dout.data(), in.data(), H, W, ksz, dw0.data());
    k::set_backend(k::Backend::avx2);
    k::dwconv_plane_bwd_w(dout.data(), in.data(), H, W, ksz, dw1.data());
    CHECK(max_rel(dw0, dw1) < 5e-5);
  }
}
