// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// The three learnable building blocks and the recurrent stage that composes
// them:
//
//   MSGM   dual-branch gated convolution: a 1x1 branch, GeLU-activated,
//          multiplicatively gates a 1x1 -> depthwise -> 1x1 branch; a final
//          1x1 projects back to C channels.
//   MoE-FS softmax-gated fusion of tapped stage outputs.
//   SS-ReM one unfolded stage: z and beta from layer-normed MSGMs, sparse
//          attention over z + alpha + f_y, then two residual MSGMs.

#pragma once

#include <string>
#include <vector>

#include "ssiu/core/tensor.hpp"
#include "ssiu/nn/attention.hpp"
#include "ssiu/nn/layers.hpp"
#include "ssiu/nn/param.hpp"

namespace ssiu::nn {

struct MSGMConfig {
  int channels = 64;
  int hidden_channels = 32;
  int dw_kernel = 3;

  void validate() const {
    SSIU_CHECK(channels >= 1 && hidden_channels >= 1, "msgm channels must be >= 1");
    SSIU_CHECK(dw_kernel >= 3 && dw_kernel % 2 == 1, "msgm dw kernel must be odd >= 3");
  }
};

template <class T>
class MSGM {
 public:
  MSGM() = default;
  explicit MSGM(const MSGMConfig& cfg);

  struct Cache {
    typename Conv2d<T>::Cache c_gate, c_expand, c_mid, c_out;
    typename DepthwiseConv2d<T>::Cache c_dw;
    typename Gelu<T>::Cache c_gelu;
    Tensor<T> gated;  // gelu(f1)
    Tensor<T> value;  // f2
  };

  Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

  void collect_params(ParamRefs<T>& out, const std::string& prefix) {
    gate_proj.collect_params(out, prefix + ".gate");
    expand_proj.collect_params(out, prefix + ".expand");
    dw.collect_params(out, prefix + ".dw");
    mid_proj.collect_params(out, prefix + ".mid");
    out_proj.collect_params(out, prefix + ".out");
  }

  const MSGMConfig& config() const { return cfg_; }

  Conv2d<T> gate_proj;    // C -> hidden
  Conv2d<T> expand_proj;  // C -> hidden
  DepthwiseConv2d<T> dw;  // hidden
  Conv2d<T> mid_proj;     // hidden -> hidden
  Conv2d<T> out_proj;     // hidden -> C

 private:
  MSGMConfig cfg_;
};

struct MoEFSConfig {
  int channels = 64;
  int num_experts = 3;

  void validate() const {
    SSIU_CHECK(channels >= 1, "moe channels must be >= 1");
    SSIU_CHECK(num_experts >= 2, "moe needs at least 2 experts");
  }
};

template <class T>
struct MoEProbe {
  std::vector<Tensor<T>> gates;  // per expert, same shape as the inputs
};

template <class T>
class MoEFS {
 public:
  MoEFS() = default;
  explicit MoEFS(const MoEFSConfig& cfg);

  struct Cache {
    std::vector<typename Conv2d<T>::Cache> c_experts;
    std::vector<Tensor<T>> inputs;
    std::vector<Tensor<T>> gates;
    typename Conv2d<T>::Cache c_fuse;
  };

  Tensor<T> forward(const std::vector<Tensor<T>>& alphas, Cache* cache,
                    MoEProbe<T>* probe = nullptr) const;
  std::vector<Tensor<T>> backward(const Cache& cache, const Tensor<T>& dy);

  void collect_params(ParamRefs<T>& out, const std::string& prefix) {
    for (size_t e = 0; e < experts.size(); ++e)
      experts[e].collect_params(out, prefix + ".expert" + std::to_string(e));
    fuse.collect_params(out, prefix + ".fuse");
  }

  const MoEFSConfig& config() const { return cfg_; }

  std::vector<Conv2d<T>> experts;  // 1x1, C -> C
  Conv2d<T> fuse;                  // 1x1, C -> C

 private:
  MoEFSConfig cfg_;
};

template <class T>
class SSReM {
 public:
  SSReM() = default;
  SSReM(const MSGMConfig& msgm_cfg, const ESAMConfig& esam_cfg);

  struct Cache {
    typename LayerNormChannel<T>::Cache c_ln1, c_ln2;
    typename MSGM<T>::Cache c_m1, c_m2, c_m3, c_m4;
    typename ESAM<T>::Cache c_esam;
    Tensor<T> z;     // S1 output (exposed for dataflow tests)
    Tensor<T> beta;  // S2 output
  };

  Tensor<T> forward(const Tensor<T>& alpha, const Tensor<T>& f_y, Cache* cache,
                    AttentionProbe<T>* probe = nullptr) const;
  // Returns d(alpha); accumulates the stage's f_y gradient into dfy_accum.
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dout, Tensor<T>& dfy_accum);

  void collect_params(ParamRefs<T>& out, const std::string& prefix) {
    ln1.collect_params(out, prefix + ".ln1");
    ln2.collect_params(out, prefix + ".ln2");
    msgm1.collect_params(out, prefix + ".msgm1");
    msgm2.collect_params(out, prefix + ".msgm2");
    msgm3.collect_params(out, prefix + ".msgm3");
    msgm4.collect_params(out, prefix + ".msgm4");
    esam.collect_params(out, prefix + ".esam");
  }

  LayerNormChannel<T> ln1, ln2;
  MSGM<T> msgm1, msgm2, msgm3, msgm4;
  ESAM<T> esam;
};

}  // namespace ssiu::nn
