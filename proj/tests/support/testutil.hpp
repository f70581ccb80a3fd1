// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ssiu/core/rng.hpp"
#include "ssiu/core/tensor.hpp"
#include "ssiu/nn/param.hpp"

namespace ssiu::test {

template <class T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo = -1.0, double hi = 1.0) {
  T* p = t.data();
  for (size_t i = 0, e = t.numel(); i < e; ++i) p[i] = T(rng.uniform(lo, hi));
}

template <class T>
Tensor<T> random_tensor(int n, int c, int h, int w, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(n, c, h, w);
  fill_uniform(t, rng, lo, hi);
  return t;
}

template <class T>
double tensor_sum(const Tensor<T>& t) {
  double s = 0.0;
  const T* p = t.data();
  for (size_t i = 0, e = t.numel(); i < e; ++i) s += double(p[i]);
  return s;
}

template <class T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  if (!(a.shape() == b.shape())) return 1e30;
  double m = 0.0;
  for (size_t i = 0, e = a.numel(); i < e; ++i)
    m = std::max(m, std::fabs(double(a.data()[i]) - double(b.data()[i])));
  return m;
}

template <class T>
void randomize_params(nn::ParamRefs<T>& refs, Rng& rng, double scale = 0.2) {
  for (auto& [name, p] : refs) fill_uniform(p->value, rng, -scale, scale);
}

template <class T>
void zero_param_grads(nn::ParamRefs<T>& refs) {
  for (auto& [name, p] : refs) {
    p->ensure_grad();
    p->zero_grad();
  }
}

// One sampled coordinate for a finite-difference check: the location that
// will be perturbed and the analytic gradient previously computed for it.
struct GradCoord {
  double* ptr;
  double analytic;
};

struct GradCheckResult {
  int total = 0;
  int passed = 0;
  double worst_rel = 0.0;

  double pass_fraction() const { return total ? double(passed) / total : 1.0; }
};

// Central differences with step h against a pure scalar loss function.
inline GradCheckResult check_gradients(const std::vector<GradCoord>& coords,
                                       const std::function<double()>& loss_fn, double h = 1e-4,
                                       double rel_tol = 1e-4) {
  GradCheckResult res;
  for (const auto& c : coords) {
    double v0 = *c.ptr;
    *c.ptr = v0 + h;
    double lp = loss_fn();
    *c.ptr = v0 - h;
    double lm = loss_fn();
    *c.ptr = v0;
    double numeric = (lp - lm) / (2.0 * h);
    double denom = std::max({std::fabs(numeric), std::fabs(c.analytic), 1e-8});
    double rel = std::fabs(numeric - c.analytic) / denom;
    res.total++;
    if (rel <= rel_tol || (std::fabs(numeric) < 1e-10 && std::fabs(c.analytic) < 1e-10))
      res.passed++;
    res.worst_rel = std::max(res.worst_rel, rel);
  }
  return res;
}

// Samples up to `count` parameter coordinates (after a backward pass filled
// the grads) plus optionally input coordinates.
inline std::vector<GradCoord> sample_param_coords(nn::ParamRefs<double>& refs, int count,
                                                  Rng& rng) {
  std::vector<GradCoord> out;
  size_t total = 0;
  for (auto& [name, p] : refs) total += p->value.numel();
  for (int i = 0; i < count; ++i) {
    size_t flat = size_t(rng.uniform_int(int64_t(total)));
    for (auto& [name, p] : refs) {
      if (flat < p->value.numel()) {
        out.push_back({p->value.data() + flat, double(p->grad.data()[flat])});
        break;
      }
      flat -= p->value.numel();
    }
  }
  return out;
}

inline std::vector<GradCoord> sample_tensor_coords(Tensor<double>& t, const Tensor<double>& grad,
                                                   int count, Rng& rng) {
  std::vector<GradCoord> out;
  for (int i = 0; i < count; ++i) {
    size_t flat = size_t(rng.uniform_int(int64_t(t.numel())));
    out.push_back({t.data() + flat, double(grad.data()[flat])});
  }
  return out;
}

}  // namespace ssiu::test
