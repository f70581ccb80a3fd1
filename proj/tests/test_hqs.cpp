// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ssiu/core/rng.hpp"
#include "ssiu/hqs/hqs.hpp"

using namespace ssiu;
using namespace ssiu::hqs;

namespace {

HQSProblem identity_problem(int d, Vector y) {
  HQSProblem p;
  p.y = std::move(y);
  p.H = Matrix(d, d);
  p.Phi = Matrix(d, d);
  for (int i = 0; i < d; ++i) {
    p.H(i, i) = 1.0;
    p.Phi(i, i) = 1.0;
  }
  p.eta = 1.0;
  return p;
}

double linf(const Vector& a, const Vector& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("soft threshold matches the definition") {
  Vector x = {0.5, -0.3, 0.1};
  Vector y = soft_threshold(x, 0.2);
  CHECK(y[0] == Catch::Approx(0.3));
  CHECK(y[1] == Catch::Approx(-0.1));
  CHECK(y[2] == Catch::Approx(0.0));

  // tau = 0 is the identity
  Vector z = soft_threshold(x, 0.0);
  CHECK(linf(x, z) == 0.0);

  // full shrinkage
  CHECK(soft_threshold({1.0}, 2.0)[0] == 0.0);

  CHECK_THROWS_AS(soft_threshold(x, -0.1), std::invalid_argument);
}

TEST_CASE("soft threshold is odd and non-expansive") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    int d = 1 + int(rng.uniform_int(16));
    double tau = rng.uniform(0.0, 1.5);
    Vector a(d), b(d);
    for (int i = 0; i < d; ++i) {
      a[i] = rng.uniform(-3, 3);
      b[i] = rng.uniform(-3, 3);
    }
    Vector na(d);
    for (int i = 0; i < d; ++i) na[i] = -a[i];
    Vector sa = soft_threshold(a, tau);
    Vector sna = soft_threshold(na, tau);
    for (int i = 0; i < d; ++i) CHECK(sna[i] == Catch::Approx(-sa[i]).margin(1e-15));

    Vector sb = soft_threshold(b, tau);
    double num = 0, den = 0;
    for (int i = 0; i < d; ++i) {
      num += (sa[i] - sb[i]) * (sa[i] - sb[i]);
      den += (a[i] - b[i]) * (a[i] - b[i]);
    }
    CHECK(num <= den + 1e-12);
  }
}

TEST_CASE("objective value and edge cases") {
  // y = K a exactly, z = a, b = a  ->  lambda * ||a||_1
  int d = 4;
  Vector a = {0.5, -1.0, 0.0, 2.0};
  HQSProblem p = identity_problem(d, a);
  p.lambda = 0.7;
  p.gamma = 0.3;
  CHECK(objective(p, a, a, a) == Catch::Approx(0.7 * 3.5));

  // a = b = z = 0, y != 0  ->  ||y||^2
  Vector zero(d, 0.0);
  double y_sq = 0;
  for (double v : p.y) y_sq += v * v;
  CHECK(objective(p, zero, zero, zero) == Catch::Approx(y_sq));

  CHECK_THROWS_AS(objective(p, Vector(d + 1, 0.0), zero, zero), std::invalid_argument);
}

TEST_CASE("objective matches an independent scalar recomputation") {
  // Independent oracle: each of the four terms summed with bare loops on a
  // random rectangular instance.
  Rng rng(77);
  int m = 5, n = 6, d = 7;
  HQSProblem p;
  p.H = Matrix(m, n);
  p.Phi = Matrix(n, d);
  p.y.resize(m);
  for (auto& v : p.y) v = rng.uniform(-1, 1);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) p.H(i, j) = rng.uniform(-1, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) p.Phi(i, j) = rng.uniform(-1, 1);
  p.lambda = 0.4;
  p.gamma = 0.9;
  p.eta = 1.7;
  Vector a(d), b(d), z(d);
  for (int i = 0; i < d; ++i) {
    a[i] = rng.uniform(-1, 1);
    b[i] = rng.uniform(-1, 1);
    z[i] = rng.uniform(-1, 1);
  }

  double fid = 0;
  for (int i = 0; i < m; ++i) {
    double kai = 0;
    for (int j = 0; j < d; ++j) {
      double kij = 0;
      for (int t = 0; t < n; ++t) kij += p.H(i, t) * p.Phi(t, j);
      kai += kij * a[j];
    }
    fid += (p.y[i] - kai) * (p.y[i] - kai);
  }
  double l1z = 0, l1ab = 0, l2za = 0;
  for (int j = 0; j < d; ++j) {
    l1z += std::fabs(z[j]);
    l1ab += std::fabs(a[j] - b[j]);
    l2za += (z[j] - a[j]) * (z[j] - a[j]);
  }
  double expected = fid + p.lambda * l1z + p.gamma * l1ab + p.eta * std::sqrt(l2za);
  CHECK(objective(p, a, b, z) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("hqs_step reduces to a plain gradient step when thresholds vanish") {
  Rng rng(13);
  int d = 6;
  HQSProblem p = identity_problem(d, {});
  p.y.resize(d);
  for (auto& v : p.y) v = rng.uniform(-1, 1);
  HQSParams prm;
  prm.tau1 = prm.tau2 = prm.tau3 = 0.0;
  prm.omega1 = 0.0;
  prm.omega2 = 1.0;
  prm.c = 2.0;
  prm.beta_estimator = soft_threshold_beta();

  Vector a0(d);
  for (auto& v : a0) v = rng.uniform(-1, 1);
  HQSState s = initial_state(p, a0);
  HQSState s1 = hqs_step(p, prm, s);
  // With S2 at tau2 = 0, beta = alpha and S3.b collapses to v' itself:
  // a' = a + K^T(y - K a)/c.
  for (int i = 0; i < d; ++i)
    CHECK(s1.alpha[i] == Catch::Approx(a0[i] + (p.y[i] - a0[i]) / prm.c).margin(1e-14));
  CHECK(s1.iteration == 1);
}

TEST_CASE("zero is a fixed point when y = 0") {
  int d = 5;
  HQSProblem p = identity_problem(d, Vector(d, 0.0));
  HQSParams prm = default_params(p);
  prm.c = 1.0;
  HQSState s = initial_state(p, Vector(d, 0.0));
  HQSState s1 = hqs_step(p, prm, s);
  for (double v : s1.alpha) CHECK(v == 0.0);
  for (double v : s1.z) CHECK(v == 0.0);
  CHECK(s1.iteration == 1);
  CHECK(s1.objective == 0.0);
}

TEST_CASE("one step on a 3-atom orthonormal instance matches a hand trace") {
  // K = I (orthonormal), y = (0.9, -0.4, 0.2), a0 = (0.5, 0.5, -0.5),
  // tau1 = 0.1, tau2 = 0.3, tau3 = 0.05, w1 = 0.5, w2 = 1, c = 2.
  //   S1: z = S_0.1(a0) = (0.4, 0.4, -0.4)
  //   S2: b = S_0.3(a0) = (0.2, 0.2, -0.2)
  //   S3.a: v = 0.5 z + (y - a0)/2 + a0
  //       = (0.2+0.2+0.5, 0.2-0.45+0.5, -0.2+0.35-0.5) = (0.9, 0.25, -0.35)
  //   S3.b: a1 = S_0.05(v - b) + b = S_0.05(0.7, 0.05, -0.15) + b
  //       = (0.65, 0, -0.1) + (0.2, 0.2, -0.2) = (0.85, 0.2, -0.3)
  HQSProblem p = identity_problem(3, {0.9, -0.4, 0.2});
  HQSParams prm;
  prm.tau1 = 0.1;
  prm.tau2 = 0.3;
  prm.tau3 = 0.05;
  prm.omega1 = 0.5;
  prm.omega2 = 1.0;
  prm.c = 2.0;
  HQSState s = initial_state(p, {0.5, 0.5, -0.5});
  HQSState s1 = hqs_step(p, prm, s);
  CHECK(s1.z[0] == Catch::Approx(0.4));
  CHECK(s1.z[1] == Catch::Approx(0.4));
  CHECK(s1.z[2] == Catch::Approx(-0.4));
  CHECK(s1.beta[0] == Catch::Approx(0.2));
  CHECK(s1.v[0] == Catch::Approx(0.9));
  CHECK(s1.v[1] == Catch::Approx(0.25));
  CHECK(s1.v[2] == Catch::Approx(-0.35));
  CHECK(s1.alpha[0] == Catch::Approx(0.85));
  CHECK(s1.alpha[1] == Catch::Approx(0.2));
  CHECK(s1.alpha[2] == Catch::Approx(-0.3));
}

TEST_CASE("pure gradient configuration decreases the data term monotonically") {
  Rng rng(99);
  int m = 8, d = 12;
  HQSProblem p;
  p.H = Matrix(m, m);
  for (int i = 0; i < m; ++i) p.H(i, i) = 1.0;
  p.Phi = Matrix(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) p.Phi(i, j) = rng.normal() / std::sqrt(double(m));
  p.y.resize(m);
  for (auto& v : p.y) v = rng.uniform(-1, 1);

  Matrix K = p.K();
  HQSParams prm;
  prm.tau1 = prm.tau2 = prm.tau3 = 0.0;
  prm.omega1 = 0.0;
  prm.omega2 = 1.0;
  prm.c = 1.0 * sigma_max_sq(K);
  prm.beta_estimator = zero_beta();

  Vector a(d);
  for (auto& v : a) v = rng.uniform(-1, 1);
  HQSState s = initial_state(p, a);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    s = hqs_step(p, prm, s);
    Vector r = matvec(K, s.alpha);
    double fid = 0;
    for (int i = 0; i < m; ++i) fid += (p.y[i] - r[i]) * (p.y[i] - r[i]);
    CHECK(fid <= prev + 1e-12);
    prev = fid;
  }
}

TEST_CASE("hqs_solve stops after one iteration with infinite tolerance") {
  HQSProblem p = identity_problem(4, {1.0, 2.0, 3.0, 4.0});
  HQSParams prm = default_params(p);
  prm.tol = std::numeric_limits<double>::infinity();
  prm.max_iters = 100;
  SolveResult r = hqs_solve(p, prm, Vector(4, 0.0));
  CHECK(r.state.iteration == 1);
  CHECK(r.objective_trace.size() == 1);
}

TEST_CASE("single-atom instance matches the orthonormal closed form") {
  // One atom, gamma = 0, omega1 = 0, beta = 0: the iteration is ISTA for
  // ||y - K a||^2 + lam ||a||_1 with lam = 2 c tau3; for orthonormal K the
  // minimizer is S_{lam/2}(K^T y).
  Rng rng(3);
  int m = 8;
  HQSProblem p;
  p.H = Matrix(m, m);
  for (int i = 0; i < m; ++i) p.H(i, i) = 1.0;
  p.Phi = Matrix(m, 1);
  double nrm = 0;
  for (int i = 0; i < m; ++i) {
    p.Phi(i, 0) = rng.normal();
    nrm += p.Phi(i, 0) * p.Phi(i, 0);
  }
  nrm = std::sqrt(nrm);
  for (int i = 0; i < m; ++i) p.Phi(i, 0) /= nrm;  // unit column -> orthonormal
  p.y.resize(m);
  for (int i = 0; i < m; ++i) p.y[i] = 1.7 * p.Phi(i, 0) + 0.01 * rng.normal();

  Matrix K = p.K();
  double lam = 0.3;
  HQSParams prm;
  prm.c = 1.05;  // sigma_max^2 = 1 for a unit column
  prm.tau3 = lam / (2 * prm.c);
  prm.omega1 = 0.0;
  prm.omega2 = 1.0;
  prm.beta_estimator = zero_beta();
  prm.max_iters = 5000;
  prm.tol = 1e-14;
  SolveResult r = hqs_solve(p, prm, Vector(1, 0.0));

  Vector kty = matvec_t(K, p.y);
  double expected = soft_threshold(kty, lam / 2)[0];
  CHECK(r.state.alpha[0] == Catch::Approx(expected).margin(1e-8));
}

TEST_CASE("large gamma with a constant beta pulls alpha toward beta0") {
  Rng rng(21);
  int m = 10, d = 10;
  HQSProblem p = identity_problem(d, {});
  p.y.resize(m);
  for (auto& v : p.y) v = rng.uniform(-1, 1);
  Vector beta0(d, 0.8);

  auto run = [&](double gamma, double tau3) {
    HQSProblem q = p;
    q.gamma = gamma;
    HQSParams prm;
    prm.c = 1.05;
    prm.tau1 = 0.0;
    prm.tau2 = 0.0;
    prm.tau3 = tau3;
    prm.omega1 = 0.0;
    prm.omega2 = 1.0;
    prm.beta_estimator = constant_beta(beta0);
    prm.max_iters = 2000;
    prm.tol = 1e-12;
    SolveResult r = hqs_solve(q, prm, Vector(d, 0.0));
    double l1 = 0;
    for (int i = 0; i < d; ++i) l1 += std::fabs(r.state.alpha[i] - beta0[i]);
    return l1;
  };

  // tau3 realizes the gamma-weighted proximal shrink toward beta0: larger
  // gamma -> larger threshold -> alpha closer to beta0 in l1.
  double far = run(0.0, 0.0);
  double near = run(5.0, 5.0 / (2 * 1.05));
  CHECK(near < far);
}

TEST_CASE("solve detects non-finite iterates") {
  HQSProblem p = identity_problem(3, {1.0, 1.0, 1.0});
  HQSParams prm = default_params(p);
  prm.c = 1e-300;  // absurd step size blows the iteration up
  prm.max_iters = 2000;
  prm.tol = 1e-30;
  CHECK_THROWS_AS(hqs_solve(p, prm, Vector(3, 1e300)), numerical_error);
}

TEST_CASE("lasso coordinate descent oracle") {
  Rng rng(8);

  SECTION("lam = 0 with a well-conditioned square K solves the linear system") {
    int d = 6;
    Matrix K(d, d);
    for (int i = 0; i < d; ++i) {
      K(i, i) = 2.0;
      for (int j = 0; j < d; ++j) K(i, j) += 0.1 * rng.uniform(-1, 1);
    }
    Vector truth(d);
    for (auto& v : truth) v = rng.uniform(-1, 1);
    Vector y = matvec(K, truth);
    Vector sol = lasso_cd(K, y, 0.0, 1e-12, 500000);
    CHECK(linf(sol, truth) < 1e-5);
  }

  SECTION("orthonormal K gives the soft-threshold closed form") {
    int d = 8;
    Matrix K(d, d);
    for (int i = 0; i < d; ++i) K(i, i) = 1.0;
    Vector y(d);
    for (auto& v : y) v = rng.uniform(-2, 2);
    double lam = 0.8;
    Vector sol = lasso_cd(K, y, lam);
    Vector expected = soft_threshold(y, lam / 2);
    CHECK(linf(sol, expected) < 1e-9);
  }

  SECTION("random 8x16 instance satisfies the subgradient conditions") {
    int m = 8, d = 16;
    Matrix K(m, d);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) K(i, j) = rng.normal() / std::sqrt(double(m));
    Vector y(m);
    for (auto& v : y) v = rng.uniform(-1, 1);
    double lam = 0.2;
    Vector sol = lasso_cd(K, y, lam);
    Vector r = y;
    Vector ks = matvec(K, sol);
    for (int i = 0; i < m; ++i) r[i] -= ks[i];
    Vector g = matvec_t(K, r);
    for (int j = 0; j < d; ++j) {
      double gj = 2.0 * g[j];
      if (sol[j] != 0.0)
        CHECK(std::fabs(gj - lam * (sol[j] > 0 ? 1 : -1)) < 1e-8);
      else
        CHECK(std::fabs(gj) <= lam + 1e-8);
    }
  }
}

TEST_CASE("oracle suite agrees with the lasso oracle on seeded instances") {
  auto results = run_oracle_suite(1234, 20, 1e-4);
  REQUIRE(results.size() == 20);
  for (const auto& r : results) {
    INFO("instance seed " << r.seed << " dim " << r.dim << " linf " << r.linf_diff);
    CHECK(r.passed);
    CHECK(r.trace_finite);
    CHECK(r.cd_optimality_ok);
    CHECK(r.linf_diff <= 1e-4);
  }
  // Negative control: an absurd tolerance must produce failures, proving the
  // comparison is live.
  auto strict = run_oracle_suite(1234, 20, 1e-12);
  int failures = 0;
  for (const auto& r : strict)
    if (!r.passed) ++failures;
  CHECK(failures > 0);

  // n = 0 yields an empty table.
  CHECK(run_oracle_suite(1234, 0).empty());
}
