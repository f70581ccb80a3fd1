// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Primitive differentiable layers. Every layer follows the same protocol:
//
//   Tensor y = layer.forward(x, &cache);   // cache == nullptr -> inference
//   Tensor dx = layer.backward(cache, dy); // accumulates parameter grads
//
// forward with a null cache touches no mutable state and is safe to call
// concurrently; backward requires exclusive access to the layer (it writes
// parameter gradients).

#pragma once

#include <cstdint>
#include <vector>

#include "ssiu/core/tensor.hpp"
#include "ssiu/nn/param.hpp"

namespace ssiu::nn {

// Symmetric (edge-repeating) reflection of an out-of-range index into
// [0, size). Well defined for any non-negative index; used for the internal
// padding that makes pooling and block partitioning divide evenly.
inline int fold_index(int i, int size) {
  if (size == 1) return 0;
  int period = 2 * size;
  int j = i % period;
  if (j < 0) j += period;
  return j < size ? j : period - 1 - j;
}

// ---------------------------------------------------------------------------
// Conv2d: kxk convolution, stride 1, zero padding k/2 (same-size output).
// Weight layout [out_ch, in_ch, k, k]; 1x1 convolutions skip im2col and run
// as a plain GEMM over pixels.
// ---------------------------------------------------------------------------
template <class T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int ksize);

  struct Cache {
    Tensor<T> input;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

  void collect_params(ParamRefs<T>& out, const std::string& prefix) {
    out.emplace_back(prefix + ".weight", &weight);
    out.emplace_back(prefix + ".bias", &bias);
  }

  int in_ch() const { return in_ch_; }
  int out_ch() const { return out_ch_; }
  int ksize() const { return k_; }

  Param<T> weight;
  Param<T> bias;

 private:
  int in_ch_ = 0, out_ch_ = 0, k_ = 1;
};

// ---------------------------------------------------------------------------
// DepthwiseConv2d: per-channel kxk convolution, zero padding k/2.
// ---------------------------------------------------------------------------
template <class T>
class DepthwiseConv2d {
 public:
  DepthwiseConv2d() = default;
  DepthwiseConv2d(int channels, int ksize);

  struct Cache {
    Tensor<T> input;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

  void collect_params(ParamRefs<T>& out, const std::string& prefix) {
    out.emplace_back(prefix + ".weight", &weight);
    out.emplace_back(prefix + ".bias", &bias);
  }

  Param<T> weight;  // [C, 1, k, k]
  Param<T> bias;    // [1,1,1,C]

 private:
  int channels_ = 0, k_ = 3;
};

// ---------------------------------------------------------------------------
// LayerNormChannel: normalization over the channel axis at each spatial
// position, with per-channel affine parameters.
// ---------------------------------------------------------------------------
template <class T>
class LayerNormChannel {
 public:
  LayerNormChannel() = default;
  explicit LayerNormChannel(int channels, T eps = T(1e-6));

  struct Cache {
    Tensor<T> input;
    Tensor<T> mean;     // [N,1,H,W]
    Tensor<T> inv_std;  // [N,1,H,W]
  };

  Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

  void collect_params(ParamRefs<T>& out, const std::string& prefix) {
    out.emplace_back(prefix + ".gamma", &gamma);
    out.emplace_back(prefix + ".beta", &beta);
  }

  Param<T> gamma;  // [1,1,1,C], init 1
  Param<T> beta;   // [1,1,1,C], init 0

 private:
  int channels_ = 0;
  T eps_ = T(1e-6);
};

// ---------------------------------------------------------------------------
// GELU (exact, erf-based), stateless.
// ---------------------------------------------------------------------------
template <class T>
struct Gelu {
  struct Cache {
    Tensor<T> input;
  };
  static Tensor<T> forward(const Tensor<T>& x, Cache* cache);
  static Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);
};

// ---------------------------------------------------------------------------
// MaxPool2d with symmetric-reflection padding on the bottom/right so the
// window grid always divides; argmax indices are recorded for backward.
// ---------------------------------------------------------------------------
template <class T>
class MaxPool2d {
 public:
  MaxPool2d() = default;
  MaxPool2d(int kernel, int stride) : kernel_(kernel), stride_(stride) {}

  struct Cache {
    Shape4 in_shape;
    std::vector<int32_t> argmax;  // flat plane index per output element
  };

  Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy) const;

  static void out_size(int size, int kernel, int stride, int* padded, int* out);

  int kernel() const { return kernel_; }
  int stride() const { return stride_; }

 private:
  int kernel_ = 2, stride_ = 2;
};

// ---------------------------------------------------------------------------
// BilinearResize: half-pixel-center bilinear interpolation to an arbitrary
// size. Linear, parameter-free; backward is the exact adjoint.
// ---------------------------------------------------------------------------
template <class T>
class BilinearResize {
 public:
  struct Cache {
    Shape4 in_shape;
  };

  static Tensor<T> forward(const Tensor<T>& x, int out_h, int out_w, Cache* cache);
  static Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);
};

// ---------------------------------------------------------------------------
// PixelShuffle: [N, C*s^2, H, W] -> [N, C, H*s, W*s].
// ---------------------------------------------------------------------------
template <class T>
class PixelShuffle {
 public:
  PixelShuffle() = default;
  explicit PixelShuffle(int s) : s_(s) {}

  struct Cache {
    Shape4 in_shape;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy) const;

  int scale() const { return s_; }

 private:
  int s_ = 2;
};

// Elementwise helpers on tensors (shape-checked).
template <class T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> add3(const Tensor<T>& a, const Tensor<T>& b, const Tensor<T>& c);
template <class T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T> void add_inplace(Tensor<T>& y, const Tensor<T>& x);  // y += x

}  // namespace ssiu::nn
