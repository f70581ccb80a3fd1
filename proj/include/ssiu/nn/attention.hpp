// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sparse windowed self-attention: max-pool downsampling, overlapping MxM
// block partition, per-block multi-head softmax attention, overlap-averaged
// merge, 3x3 refinement, bilinear upsample back to the input size. The dense
// variant (ablation) skips the pooling step and runs the same windowed
// attention at full resolution.

#pragma once

#include <vector>

#include "ssiu/core/tensor.hpp"
#include "ssiu/nn/layers.hpp"
#include "ssiu/nn/param.hpp"

namespace ssiu::nn {

struct BlockGrid {
  int H1 = 0, W1 = 0;  // map fed to the partition
  int Hp = 0, Wp = 0;  // padded so windows tile exactly
  int M = 0, O = 0;    // window side, overlap
  int step = 0;        // M - O
  int nh = 0, nw = 0;  // windows per axis

  int blocks() const { return nh * nw; }
  int tokens() const { return M * M; }
};

BlockGrid make_block_grid(int H1, int W1, int M, int O);

// [N, C, H1, W1] -> [N*blocks, heads, M*M, C/heads]. Out-of-range window
// positions read through symmetric reflection.
template <class T>
Tensor<T> partition_tokens(const Tensor<T>& x, const BlockGrid& g, int heads);

// Exact adjoint of partition_tokens (scatter-add through the reflection).
template <class T>
Tensor<T> partition_tokens_adjoint(const Tensor<T>& tokens, const BlockGrid& g, int heads,
                                   Shape4 x_shape);

// Scatter token blocks onto the padded map, average overlapping positions,
// crop to H1 x W1.
template <class T>
Tensor<T> merge_tokens(const Tensor<T>& tokens, const BlockGrid& g, int heads, int N, int C);

// Adjoint of merge_tokens.
template <class T>
Tensor<T> merge_tokens_adjoint(const Tensor<T>& dmap, const BlockGrid& g, int heads);

// Test/instrumentation tap for attention internals.
template <class T>
struct AttentionProbe {
  bool capture_row_sums = false;
  bool capture_first_block = false;
  std::vector<double> row_sums;  // one entry per softmax row
  Tensor<T> first_block_attn;    // [1, heads, n, n]
};

// Softmax(Q K^T / sqrt(dk)) V over token blocks [NB, heads, n, dk].
template <class T>
struct AttentionCore {
  struct Cache {
    Tensor<T> q, k, v;
    Tensor<T> attn;  // post-softmax, [NB, heads, n, n]
  };

  static Tensor<T> forward(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                           Cache* cache, AttentionProbe<T>* probe = nullptr);
  static void backward(const Cache& cache, const Tensor<T>& dy, Tensor<T>* dq, Tensor<T>* dk,
                       Tensor<T>* dv);
};

struct ESAMConfig {
  int channels = 64;
  int pool_kernel = 3;
  int pool_stride = 3;
  int block_size = 8;  // M
  int overlap = 2;     // O, 0 <= O < M
  int num_heads = 4;
  bool dense = false;  // ablation: attention at full resolution, no pooling

  void validate() const;
};

template <class T>
class ESAM {
 public:
  ESAM() = default;
  explicit ESAM(const ESAMConfig& cfg);

  struct Cache {
    Shape4 in_shape;
    typename MaxPool2d<T>::Cache pool;
    typename Conv2d<T>::Cache cq, ck, cv;
    BlockGrid grid;
    typename AttentionCore<T>::Cache attn;
    typename Conv2d<T>::Cache cpsi;
    typename BilinearResize<T>::Cache up;
  };

  Tensor<T> forward(const Tensor<T>& x, Cache* cache,
                    AttentionProbe<T>* probe = nullptr) const;
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

  void collect_params(ParamRefs<T>& out, const std::string& prefix) {
    proj_q.collect_params(out, prefix + ".q");
    proj_k.collect_params(out, prefix + ".k");
    proj_v.collect_params(out, prefix + ".v");
    psi.collect_params(out, prefix + ".psi");
  }

  const ESAMConfig& config() const { return cfg_; }

  Conv2d<T> proj_q, proj_k, proj_v;  // 1x1, C -> C
  Conv2d<T> psi;                     // 3x3, C -> C
  MaxPool2d<T> pool;

 private:
  ESAMConfig cfg_;
};

}  // namespace ssiu::nn
