// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// The assembled network: shallow 3x3 embedding, N stacked SS-ReM stages,
// expert-gated fusion of tapped stage outputs, and the reconstruction head
// (1x1 expansion -> pixel shuffle -> GeLU -> 3x3), plus a bilinear global
// residual. A model whose parameters are all zero reproduces plain bilinear
// upsampling exactly.

#pragma once

#include <cstdint>
#include <vector>

#include "ssiu/model/config.hpp"
#include "ssiu/nn/blocks.hpp"

namespace ssiu::model {

template <class T>
class SSIUModel {
 public:
  SSIUModel() = default;
  explicit SSIUModel(const SSIUConfig& cfg);  // zero-initialized parameters

  struct Cache {
    typename nn::Conv2d<T>::Cache c_shallow;
    std::vector<typename nn::SSReM<T>::Cache> c_stages;
    typename nn::MoEFS<T>::Cache c_moe;
    typename nn::Conv2d<T>::Cache c_head_up;
    typename nn::PixelShuffle<T>::Cache c_ps;
    typename nn::Gelu<T>::Cache c_gelu;
    typename nn::Conv2d<T>::Cache c_head_out;
    typename nn::BilinearResize<T>::Cache c_up;
  };

  struct Probes {
    nn::AttentionProbe<T>* attention = nullptr;  // tapped in every stage
    nn::MoEProbe<T>* moe = nullptr;
  };

  // y: [N, 3, h, w] in [0,1]; returns [N, 3, h*s, w*s], unclamped.
  Tensor<T> forward(const Tensor<T>& y, Cache* cache, const Probes* probes = nullptr) const;

  // Returns the gradient with respect to the input image.
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dout);

  nn::ParamRefs<T> parameters();
  size_t parameter_count();
  void zero_grads();

  const SSIUConfig& config() const { return cfg_; }

  nn::Conv2d<T> shallow;  // 3x3, 3 -> C
  std::vector<nn::SSReM<T>> stages;
  nn::MoEFS<T> moe;
  nn::Conv2d<T> head_up;   // 1x1, C -> C*s^2
  nn::PixelShuffle<T> ps;  // x s
  nn::Conv2d<T> head_out;  // 3x3, C -> 3

 private:
  SSIUConfig cfg_;
};

// Deterministic construction: truncated-normal(0.02) conv kernels, zero
// biases, unit/zero layer-norm affine, drawn from a single seeded stream in
// parameter-registry order.
template <class T>
SSIUModel<T> build_model(const SSIUConfig& cfg, uint64_t seed);

}  // namespace ssiu::model
