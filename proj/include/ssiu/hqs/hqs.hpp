// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Classical solver for the constrained sparse-coding objective
//
//   min_a ||y - H Phi a||_2^2 + lambda ||z||_1 + gamma ||a - b||_1
//         + eta ||z - a||_2
//
// via the alternating updates
//
//   S1:   z' = S_tau1(a)
//   S2:   b' = S_tau2(a)                      (replaceable estimator)
//   S3.a: v' = w1 z' + w2 K^T (y - K a) / c + a,   K = H Phi
//   S3.b: a' = S_tau3(v' - b') + b'
//
// in image/coefficient space with small dense matrices. This module is the
// executable ground truth for the unfolded network's update structure and is
// double precision throughout.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ssiu/core/check.hpp"

namespace ssiu::hqs {

using Vector = std::vector<double>;

struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(size_t(r) * c, 0.0) {}
  double& operator()(int i, int j) { return a[size_t(i) * cols + j]; }
  double operator()(int i, int j) const { return a[size_t(i) * cols + j]; }
};

Matrix matmul(const Matrix& A, const Matrix& B);
Vector matvec(const Matrix& M, const Vector& x);
Vector matvec_t(const Matrix& M, const Vector& x);  // M^T x
double norm2(const Vector& x);
double norm1(const Vector& x);
double norm_inf(const Vector& x);

// Largest squared singular value of K, by power iteration on K^T K.
double sigma_max_sq(const Matrix& K, int iters = 50, uint64_t seed = 7);

// Elementwise sign(x) * max(|x| - tau, 0). tau must be >= 0.
Vector soft_threshold(const Vector& x, double tau);

struct HQSProblem {
  Vector y;      // observation, length m
  Matrix H;      // degradation, m x n
  Matrix Phi;    // dictionary, n x d
  double lambda = 0.0;  // sparsity weight, >= 0
  double gamma = 0.0;   // structural-similarity weight, >= 0
  double eta = 1.0;     // splitting weight, > 0

  int dim() const { return Phi.cols; }
  Matrix K() const { return matmul(H, Phi); }
  void validate() const;
};

// Rule producing beta from alpha. The default follows step S2 verbatim:
// beta = S_tau2(alpha). P2 as a subproblem is degenerate (any minimizer has
// beta = alpha), so the operational definition is the one implemented.
using BetaEstimator = std::function<Vector(const Vector& alpha, double tau2)>;

BetaEstimator soft_threshold_beta();          // S2 as written
BetaEstimator zero_beta();                    // beta = 0
BetaEstimator constant_beta(Vector beta0);    // beta = beta0

struct HQSParams {
  double tau1 = 0.0, tau2 = 0.0, tau3 = 0.0;
  double omega1 = 0.5, omega2 = 1.0;
  double c = 0.0;  // surrogate-convexity constant; must satisfy c >= sigma_max(K)^2
  BetaEstimator beta_estimator;  // empty -> soft_threshold_beta()
  int max_iters = 500;
  double tol = 1e-8;

  void validate() const;
};

// Default parameters for a problem: c = 1.05 sigma_max(K)^2 (power iteration)
// and tau1 = tau2 = tau3 = 0.01 ||K^T y||_inf.
HQSParams default_params(const HQSProblem& p);

struct HQSState {
  Vector alpha, beta, z, v;
  int iteration = 0;
  double objective = 0.0;
};

HQSState initial_state(const HQSProblem& p, const Vector& alpha0);

// ||y - K a||_2^2 + lambda ||z||_1 + gamma ||a - b||_1 + eta ||z - a||_2
double objective(const HQSProblem& p, const Vector& alpha, const Vector& beta, const Vector& z);

// One S1..S3.b sweep. Recomputes the objective with (a', b', z').
HQSState hqs_step(const HQSProblem& p, const HQSParams& prm, const HQSState& s);

struct SolveResult {
  HQSState state;
  std::vector<double> objective_trace;  // one entry per completed iteration
};

// Iterates hqs_step until max_iters or ||a' - a||_2 < tol. Throws
// numerical_error (with the iteration index) if a non-finite value appears.
SolveResult hqs_solve(const HQSProblem& p, const HQSParams& prm, const Vector& alpha0);

// Coordinate-descent LASSO oracle: minimizes ||y - K a||_2^2 + lam ||a||_1
// to the requested duality gap. Test-side ground truth; independent of the
// HQS iteration.
Vector lasso_cd(const Matrix& K, const Vector& y, double lam, double gap_tol = 1e-10,
                int max_sweeps = 200000);

// ---------------------------------------------------------------------------
// Seeded verification suite backing the `oracle-check` subcommand: on each
// instance, runs hqs_solve in its LASSO-equivalent configuration (gamma = 0,
// omega1 = 0, beta = 0, tau3 = lam / (2c)) and compares with lasso_cd.
// ---------------------------------------------------------------------------
struct OracleInstanceResult {
  uint64_t seed = 0;
  int dim = 0;
  double linf_diff = 0.0;      // vs lasso_cd
  double final_objective = 0.0;
  int iterations = 0;
  bool trace_finite = false;
  bool cd_optimality_ok = false;  // subgradient conditions of the CD solution
  bool passed = false;
};

std::vector<OracleInstanceResult> run_oracle_suite(uint64_t seed, int n_instances,
                                                   double tolerance = 1e-4);

}  // namespace ssiu::hqs
