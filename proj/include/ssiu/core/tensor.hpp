// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "ssiu/core/check.hpp"

namespace ssiu {

struct Shape4 {
  int n = 0, c = 0, h = 0, w = 0;
  bool operator==(const Shape4&) const = default;
  size_t numel() const { return size_t(n) * c * h * w; }
  std::string str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
  }
};

// Dense NCHW tensor with a shared, 64-byte aligned buffer. Copies are
// shallow (they alias the same storage); use clone() for a deep copy.
// Storage aliasing makes caching activations for backward cheap, with the
// discipline that a tensor is never written after it has been published to
// a cache.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w) { reset(n, c, h, w); }
  explicit Tensor(Shape4 s) { reset(s.n, s.c, s.h, s.w); }

  static Tensor zeros(int n, int c, int h, int w) {
    Tensor t(n, c, h, w);
    t.fill(T(0));
    return t;
  }
  static Tensor zeros_like(const Tensor& o) { return zeros(o.n(), o.c(), o.h(), o.w()); }
  static Tensor full(int n, int c, int h, int w, T v) {
    Tensor t(n, c, h, w);
    t.fill(v);
    return t;
  }

  void reset(int n, int c, int h, int w) {
    SSIU_CHECK(n >= 0 && c >= 0 && h >= 0 && w >= 0, "tensor dims must be non-negative");
    n_ = n;
    c_ = c;
    h_ = h;
    w_ = w;
    size_t count = numel();
    size_t bytes = (count * sizeof(T) + 63) / 64 * 64;
    T* p = static_cast<T*>(std::aligned_alloc(64, bytes ? bytes : 64));
    SSIU_CHECK(p != nullptr, "allocation of " << bytes << " bytes failed");
    buf_ = std::shared_ptr<T>(p, [](T* q) { std::free(q); });
  }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  Shape4 shape() const { return {n_, c_, h_, w_}; }
  size_t numel() const { return size_t(n_) * c_ * h_ * w_; }
  size_t plane_size() const { return size_t(h_) * w_; }
  bool empty() const { return buf_ == nullptr || numel() == 0; }

  T* data() { return buf_.get(); }
  const T* data() const { return buf_.get(); }

  T* plane(int n, int c) { return data() + (size_t(n) * c_ + c) * plane_size(); }
  const T* plane(int n, int c) const { return data() + (size_t(n) * c_ + c) * plane_size(); }

  T& at(int n, int c, int h, int w) { return plane(n, c)[size_t(h) * w_ + w]; }
  const T& at(int n, int c, int h, int w) const { return plane(n, c)[size_t(h) * w_ + w]; }

  void fill(T v) {
    T* p = data();
    for (size_t i = 0, e = numel(); i < e; ++i) p[i] = v;
  }

  Tensor clone() const {
    Tensor t(n_, c_, h_, w_);
    std::memcpy(t.data(), data(), numel() * sizeof(T));
    return t;
  }

  // View of `count` consecutive items along the batch axis, sharing storage.
  Tensor narrow(int n0, int count) const {
    SSIU_CHECK(n0 >= 0 && count >= 1 && n0 + count <= n_, "narrow range out of bounds");
    Tensor t;
    t.buf_ = std::shared_ptr<T>(buf_, buf_.get() + size_t(n0) * c_ * h_ * w_);
    t.n_ = count;
    t.c_ = c_;
    t.h_ = h_;
    t.w_ = w_;
    return t;
  }

  // Reinterpret as a different NCHW shape with the same element count.
  Tensor reshaped(int n, int c, int h, int w) const {
    SSIU_CHECK(size_t(n) * c * h * w == numel(), "reshape element count mismatch");
    Tensor t;
    t.buf_ = buf_;
    t.n_ = n;
    t.c_ = c;
    t.h_ = h;
    t.w_ = w;
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape() == o.shape(); }

  bool all_finite() const {
    const T* p = data();
    for (size_t i = 0, e = numel(); i < e; ++i)
      if (!std::isfinite(double(p[i]))) return false;
    return true;
  }

 private:
  std::shared_ptr<T> buf_;
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
};

template <typename Dst, typename Src>
Tensor<Dst> tensor_cast(const Tensor<Src>& x) {
  Tensor<Dst> y(x.n(), x.c(), x.h(), x.w());
  const Src* p = x.data();
  Dst* q = y.data();
  for (size_t i = 0, e = x.numel(); i < e; ++i) q[i] = static_cast<Dst>(p[i]);
  return y;
}

}  // namespace ssiu
