// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssiu/core/rng.hpp"
#include "ssiu/core/tensor.hpp"

namespace ssiu::nn {

template <class T>
struct Param {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on first ensure_grad()

  void ensure_grad() {
    if (grad.empty() && !value.empty()) grad = Tensor<T>::zeros_like(value);
  }
  void zero_grad() {
    if (!grad.empty()) grad.fill(T(0));
  }
};

// Named references to every parameter of a module tree, in a fixed
// registration order. The order defines optimizer update order, checkpoint
// layout, and initialization order, so it must be deterministic.
template <class T>
using ParamRefs = std::vector<std::pair<std::string, Param<T>*>>;

template <class T>
void init_conv_weight(Param<T>& w, Rng& rng, double std_dev = 0.02) {
  T* p = w.value.data();
  for (size_t i = 0, e = w.value.numel(); i < e; ++i)
    p[i] = T(rng.truncated_normal(std_dev));
}

template <class T>
size_t count_params(const ParamRefs<T>& refs) {
  size_t n = 0;
  for (const auto& [name, p] : refs) n += p->value.numel();
  return n;
}

}  // namespace ssiu::nn
