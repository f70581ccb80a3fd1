// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/hqs/hqs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssiu/core/rng.hpp"

namespace ssiu::hqs {

Matrix matmul(const Matrix& A, const Matrix& B) {
  SSIU_CHECK(A.cols == B.rows, "matmul shape mismatch " << A.rows << "x" << A.cols << " * "
                                                        << B.rows << "x" << B.cols);
  Matrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double a = A(i, k);
      for (int j = 0; j < B.cols; ++j) C(i, j) += a * B(k, j);
    }
  return C;
}

Vector matvec(const Matrix& M, const Vector& x) {
  SSIU_CHECK(int(x.size()) == M.cols, "matvec shape mismatch");
  Vector y(M.rows, 0.0);
  for (int i = 0; i < M.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < M.cols; ++j) s += M(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Vector matvec_t(const Matrix& M, const Vector& x) {
  SSIU_CHECK(int(x.size()) == M.rows, "matvec_t shape mismatch");
  Vector y(M.cols, 0.0);
  for (int i = 0; i < M.rows; ++i) {
    double xi = x[i];
    for (int j = 0; j < M.cols; ++j) y[j] += M(i, j) * xi;
  }
  return y;
}

double norm2(const Vector& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double norm1(const Vector& x) {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return s;
}

double norm_inf(const Vector& x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::fabs(v));
  return s;
}

double sigma_max_sq(const Matrix& K, int iters, uint64_t seed) {
  SSIU_CHECK(K.rows > 0 && K.cols > 0, "sigma_max_sq on empty matrix");
  Rng rng(seed);
  Vector v(K.cols);
  for (double& e : v) e = rng.normal();
  double nrm = norm2(v);
  for (double& e : v) e /= nrm;
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = matvec_t(K, matvec(K, v));
    lam = 0.0;
    for (int j = 0; j < K.cols; ++j) lam += v[j] * w[j];  // Rayleigh quotient
    double wn = norm2(w);
    if (wn == 0.0) return 0.0;
    for (int j = 0; j < K.cols; ++j) v[j] = w[j] / wn;
  }
  return lam;
}

Vector soft_threshold(const Vector& x, double tau) {
  SSIU_CHECK(tau >= 0.0, "soft_threshold requires tau >= 0, got " << tau);
  Vector y(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double m = std::fabs(x[i]) - tau;
    y[i] = m > 0.0 ? (x[i] > 0.0 ? m : -m) : 0.0;
  }
  return y;
}

void HQSProblem::validate() const {
  SSIU_CHECK(H.rows == int(y.size()), "H rows must match y length");
  SSIU_CHECK(H.cols == Phi.rows, "H cols must match Phi rows");
  SSIU_CHECK(Phi.cols >= 1, "dictionary must have at least one atom");
  SSIU_CHECK(lambda >= 0.0 && gamma >= 0.0, "lambda and gamma must be >= 0");
  SSIU_CHECK(eta > 0.0, "eta must be > 0");
}

void HQSParams::validate() const {
  SSIU_CHECK(tau1 >= 0.0 && tau2 >= 0.0 && tau3 >= 0.0, "thresholds must be >= 0");
  SSIU_CHECK(c > 0.0, "surrogate constant c must be > 0");
  SSIU_CHECK(max_iters >= 1, "max_iters must be >= 1");
  SSIU_CHECK(tol > 0.0, "tol must be > 0");
}

BetaEstimator soft_threshold_beta() {
  return [](const Vector& alpha, double tau2) { return soft_threshold(alpha, tau2); };
}

BetaEstimator zero_beta() {
  return [](const Vector& alpha, double) { return Vector(alpha.size(), 0.0); };
}

BetaEstimator constant_beta(Vector beta0) {
  return [beta0 = std::move(beta0)](const Vector& alpha, double) {
    SSIU_CHECK(beta0.size() == alpha.size(), "constant beta length mismatch");
    return beta0;
  };
}

HQSParams default_params(const HQSProblem& p) {
  p.validate();
  Matrix K = p.K();
  HQSParams prm;
  prm.c = 1.05 * sigma_max_sq(K);
  double scale = 0.01 * norm_inf(matvec_t(K, p.y));
  prm.tau1 = prm.tau2 = prm.tau3 = scale;
  prm.beta_estimator = soft_threshold_beta();
  return prm;
}

HQSState initial_state(const HQSProblem& p, const Vector& alpha0) {
  p.validate();
  SSIU_CHECK(int(alpha0.size()) == p.dim(), "alpha0 length must equal dictionary size");
  HQSState s;
  s.alpha = alpha0;
  s.beta = Vector(alpha0.size(), 0.0);
  s.z = Vector(alpha0.size(), 0.0);
  s.v = Vector(alpha0.size(), 0.0);
  s.iteration = 0;
  s.objective = objective(p, s.alpha, s.beta, s.z);
  return s;
}

double objective(const HQSProblem& p, const Vector& alpha, const Vector& beta, const Vector& z) {
  p.validate();
  int d = p.dim();
  SSIU_CHECK(int(alpha.size()) == d && int(beta.size()) == d && int(z.size()) == d,
             "objective argument length mismatch (expected " << d << ")");
  Vector r = matvec(p.K(), alpha);
  double fid = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    double e = p.y[i] - r[i];
    fid += e * e;
  }
  Vector zma(z.size());
  for (size_t i = 0; i < z.size(); ++i) zma[i] = z[i] - alpha[i];
  Vector amb(alpha.size());
  for (size_t i = 0; i < alpha.size(); ++i) amb[i] = alpha[i] - beta[i];
  return fid + p.lambda * norm1(z) + p.gamma * norm1(amb) + p.eta * norm2(zma);
}

namespace {

HQSState step_with_k(const Matrix& K, const HQSProblem& p, const HQSParams& prm,
                     const HQSState& s) {
  const BetaEstimator& est = prm.beta_estimator ? prm.beta_estimator : soft_threshold_beta();
  int d = p.dim();
  SSIU_CHECK(int(s.alpha.size()) == d, "state dimension mismatch");

  HQSState out;
  out.z = soft_threshold(s.alpha, prm.tau1);            // S1
  out.beta = est(s.alpha, prm.tau2);                    // S2
  Vector r = matvec(K, s.alpha);                        // K a
  for (size_t i = 0; i < r.size(); ++i) r[i] = p.y[i] - r[i];
  Vector grad = matvec_t(K, r);                         // K^T (y - K a)
  out.v.resize(d);
  for (int i = 0; i < d; ++i)
    out.v[i] = prm.omega1 * out.z[i] + prm.omega2 * grad[i] / prm.c + s.alpha[i];  // S3.a
  Vector shifted(d);
  for (int i = 0; i < d; ++i) shifted[i] = out.v[i] - out.beta[i];
  out.alpha = soft_threshold(shifted, prm.tau3);        // S3.b
  for (int i = 0; i < d; ++i) out.alpha[i] += out.beta[i];

  out.iteration = s.iteration + 1;
  out.objective = objective(p, out.alpha, out.beta, out.z);
  return out;
}

bool finite(const Vector& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

HQSState hqs_step(const HQSProblem& p, const HQSParams& prm, const HQSState& s) {
  p.validate();
  prm.validate();
  return step_with_k(p.K(), p, prm, s);
}

SolveResult hqs_solve(const HQSProblem& p, const HQSParams& prm, const Vector& alpha0) {
  p.validate();
  prm.validate();
  Matrix K = p.K();
  SolveResult res;
  res.state = initial_state(p, alpha0);
  res.objective_trace.reserve(prm.max_iters);
  for (int it = 0; it < prm.max_iters; ++it) {
    HQSState next = step_with_k(K, p, prm, res.state);
    if (!finite(next.alpha) || !std::isfinite(next.objective))
      throw numerical_error("hqs_solve produced a non-finite value at iteration " +
                            std::to_string(next.iteration));
    double change = 0.0;
    for (size_t i = 0; i < next.alpha.size(); ++i) {
      double d = next.alpha[i] - res.state.alpha[i];
      change += d * d;
    }
    res.state = std::move(next);
    res.objective_trace.push_back(res.state.objective);
    if (std::sqrt(change) < prm.tol) break;
  }
  return res;
}

Vector lasso_cd(const Matrix& K, const Vector& y, double lam, double gap_tol, int max_sweeps) {
  SSIU_CHECK(lam >= 0.0, "lasso_cd requires lam >= 0");
  SSIU_CHECK(K.rows == int(y.size()), "lasso_cd shape mismatch");
  int d = K.cols;
  Vector alpha(d, 0.0);
  Vector r = y;  // residual y - K alpha
  Vector col_sq(d, 0.0);
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int i = 0; i < K.rows; ++i) s += K(i, j) * K(i, j);
    col_sq[j] = s;
  }
  double thr = lam / 2.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int j = 0; j < d; ++j) {
      if (col_sq[j] == 0.0) continue;
      double rho = col_sq[j] * alpha[j];
      for (int i = 0; i < K.rows; ++i) rho += K(i, j) * r[i];
      double mag = std::fabs(rho) - thr;
      double nj = mag > 0.0 ? (rho > 0.0 ? mag : -mag) / col_sq[j] : 0.0;
      double delta = nj - alpha[j];
      if (delta != 0.0) {
        for (int i = 0; i < K.rows; ++i) r[i] -= K(i, j) * delta;
        alpha[j] = nj;
      }
    }
    // Duality gap: D(u) = -(u.y + ||u||^2/4) for feasible u (||K^T u||_inf <= lam),
    // with u = -2r scaled into feasibility.
    double primal = 0.0;
    for (double v : r) primal += v * v;
    primal += lam * norm1(alpha);
    Vector ktu = matvec_t(K, r);
    double kinf = 2.0 * norm_inf(ktu);
    double scale = (kinf > lam && kinf > 0.0) ? lam / kinf : 1.0;
    if (lam == 0.0) scale = (kinf > 0.0) ? 0.0 : 1.0;
    double uy = 0.0, uu = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
      double u = -2.0 * scale * r[i];
      uy += u * y[i];
      uu += u * u;
    }
    double dual = -(uy + 0.25 * uu);
    if (primal - dual <= gap_tol) return alpha;
  }
  throw numerical_error("lasso_cd did not reach the requested duality gap within " +
                        std::to_string(max_sweeps) + " sweeps");
}

std::vector<OracleInstanceResult> run_oracle_suite(uint64_t seed, int n_instances,
                                                   double tolerance) {
  std::vector<OracleInstanceResult> results;
  results.reserve(size_t(std::max(0, n_instances)));
  Rng master(seed);
  for (int inst = 0; inst < n_instances; ++inst) {
    uint64_t inst_seed = master.next_u64();
    Rng rng(inst_seed);

    int m = 16;
    int d = 8 + int(rng.uniform_int(25));  // 8..32
    HQSProblem p;
    p.y.resize(m);
    p.H = Matrix(m, m);
    for (int i = 0; i < m; ++i) p.H(i, i) = 1.0;
    p.Phi = Matrix(m, d);
    double inv_sqrt_m = 1.0 / std::sqrt(double(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) p.Phi(i, j) = rng.normal() * inv_sqrt_m;

    // Sparse ground truth + mild noise.
    Vector x0(d, 0.0);
    int nnz = std::max(1, d / 8);
    for (int t = 0; t < nnz; ++t) x0[rng.uniform_int(d)] = rng.bernoulli(0.5) ? 1.0 : -1.0;
    Matrix K = p.K();
    Vector kx = matvec(K, x0);
    for (int i = 0; i < m; ++i) p.y[i] = kx[i] + 0.01 * rng.normal();

    double lam = 0.2 * 2.0 * norm_inf(matvec_t(K, p.y));
    p.lambda = lam;
    p.gamma = 0.0;
    p.eta = 1.0;

    HQSParams prm;
    prm.c = 1.05 * sigma_max_sq(K);
    prm.tau1 = 0.0;
    prm.tau2 = 0.0;
    prm.tau3 = lam / (2.0 * prm.c);
    prm.omega1 = 0.0;
    prm.omega2 = 1.0;
    prm.beta_estimator = zero_beta();
    prm.max_iters = 50000;
    prm.tol = 1e-13;

    OracleInstanceResult r;
    r.seed = inst_seed;
    r.dim = d;
    try {
      SolveResult sr = hqs_solve(p, prm, Vector(d, 0.0));
      Vector cd = lasso_cd(K, p.y, lam);
      double diff = 0.0;
      for (int j = 0; j < d; ++j) diff = std::max(diff, std::fabs(sr.state.alpha[j] - cd[j]));
      r.linf_diff = diff;
      r.final_objective = sr.state.objective;
      r.iterations = sr.state.iteration;
      r.trace_finite = true;
      for (double v : sr.objective_trace)
        if (!std::isfinite(v)) r.trace_finite = false;

      // Subgradient optimality of the CD solution: |2 K^T r| <= lam (+slack),
      // with equality pattern on the support.
      Vector res = p.y;
      Vector kcd = matvec(K, cd);
      for (int i = 0; i < m; ++i) res[i] -= kcd[i];
      Vector g = matvec_t(K, res);
      r.cd_optimality_ok = true;
      for (int j = 0; j < d; ++j) {
        double gj = 2.0 * g[j];
        if (cd[j] != 0.0) {
          if (std::fabs(gj - lam * (cd[j] > 0 ? 1.0 : -1.0)) > 1e-6) r.cd_optimality_ok = false;
        } else if (std::fabs(gj) > lam + 1e-6) {
          r.cd_optimality_ok = false;
        }
      }
      r.passed = r.trace_finite && r.cd_optimality_ok && diff <= tolerance;
    } catch (const std::exception&) {
      r.passed = false;
    }
    results.push_back(r);
  }
  return results;
}

}  // namespace ssiu::hqs
