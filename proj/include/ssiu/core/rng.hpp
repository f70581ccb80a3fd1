// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ssiu {

// Deterministic random source. All sampling goes through hand-rolled
// transforms of mt19937_64 draws so that a given (seed) produces the same
// stream on every standard library implementation; std::*_distribution is
// not pinned by the standard and is deliberately avoided.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Derive an independent stream, e.g. per worker or per image.
  Rng fork(uint64_t salt) {
    uint64_t s = gen_() ^ (0x9e3779b97f4a7c15ull * (salt + 1));
    return Rng(s);
  }

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0.
  int64_t uniform_int(int64_t n) { return int64_t(uniform() * double(n)) % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; one spare value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Normal(0, std) resampled until within [-2 std, 2 std].
  double truncated_normal(double std_dev) {
    for (;;) {
      double v = normal();
      if (std::fabs(v) <= 2.0) return v * std_dev;
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ssiu
