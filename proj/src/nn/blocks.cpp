// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/nn/blocks.hpp"

#include "ssiu/kernels/kernels.hpp"

namespace ssiu::nn {

namespace k = ssiu::kernels;

// ---------------------------------------------------------------------------
// MSGM: out = Conv1x1( GeLU(Conv1x1(x)) * Conv1x1(DWConv(Conv1x1(x))) )
// ---------------------------------------------------------------------------

template <class T>
MSGM<T>::MSGM(const MSGMConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  gate_proj = Conv2d<T>(cfg.channels, cfg.hidden_channels, 1);
  expand_proj = Conv2d<T>(cfg.channels, cfg.hidden_channels, 1);
  dw = DepthwiseConv2d<T>(cfg.hidden_channels, cfg.dw_kernel);
  mid_proj = Conv2d<T>(cfg.hidden_channels, cfg.hidden_channels, 1);
  out_proj = Conv2d<T>(cfg.hidden_channels, cfg.channels, 1);
}

template <class T>
Tensor<T> MSGM<T>::forward(const Tensor<T>& x, Cache* cache) const {
  SSIU_CHECK(x.c() == cfg_.channels, "msgm expects " << cfg_.channels << " channels, got "
                                                     << x.c());
  Tensor<T> f1 = gate_proj.forward(x, cache ? &cache->c_gate : nullptr);
  Tensor<T> a2 = expand_proj.forward(x, cache ? &cache->c_expand : nullptr);
  Tensor<T> d2 = dw.forward(a2, cache ? &cache->c_dw : nullptr);
  Tensor<T> f2 = mid_proj.forward(d2, cache ? &cache->c_mid : nullptr);
  Tensor<T> g = Gelu<T>::forward(f1, cache ? &cache->c_gelu : nullptr);
  Tensor<T> p = mul(g, f2);
  Tensor<T> y = out_proj.forward(p, cache ? &cache->c_out : nullptr);
  if (cache) {
    cache->gated = g;
    cache->value = f2;
  }
  return y;
}

template <class T>
Tensor<T> MSGM<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  Tensor<T> dp = out_proj.backward(cache.c_out, dy);
  Tensor<T> dg = mul(dp, cache.value);
  Tensor<T> df2 = mul(dp, cache.gated);
  Tensor<T> df1 = Gelu<T>::backward(cache.c_gelu, dg);
  Tensor<T> dd2 = mid_proj.backward(cache.c_mid, df2);
  Tensor<T> da2 = dw.backward(cache.c_dw, dd2);
  Tensor<T> dx = expand_proj.backward(cache.c_expand, da2);
  add_inplace(dx, gate_proj.backward(cache.c_gate, df1));
  return dx;
}

// ---------------------------------------------------------------------------
// MoE-FS
// ---------------------------------------------------------------------------

template <class T>
MoEFS<T>::MoEFS(const MoEFSConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  experts.resize(cfg.num_experts);
  for (auto& e : experts) e = Conv2d<T>(cfg.channels, cfg.channels, 1);
  fuse = Conv2d<T>(cfg.channels, cfg.channels, 1);
}

template <class T>
Tensor<T> MoEFS<T>::forward(const std::vector<Tensor<T>>& alphas, Cache* cache,
                            MoEProbe<T>* probe) const {
  SSIU_CHECK(int(alphas.size()) == cfg_.num_experts,
             "moe expects " << cfg_.num_experts << " expert inputs, got " << alphas.size());
  for (const auto& a : alphas)
    SSIU_CHECK(a.shape() == alphas[0].shape() && a.c() == cfg_.channels,
               "moe expert inputs must share shape " << alphas[0].shape().str());
  int E = cfg_.num_experts;
  if (cache) {
    cache->c_experts.resize(E);
    cache->inputs = alphas;
  }

  std::vector<Tensor<T>> logits(E);
  for (int e = 0; e < E; ++e)
    logits[e] = experts[e].forward(alphas[e], cache ? &cache->c_experts[e] : nullptr);

  std::vector<Tensor<T>> gates(E);
  std::vector<const T*> in_ptr(E);
  std::vector<T*> out_ptr(E);
  for (int e = 0; e < E; ++e) {
    gates[e] = Tensor<T>(logits[e].n(), logits[e].c(), logits[e].h(), logits[e].w());
    in_ptr[e] = logits[e].data();
    out_ptr[e] = gates[e].data();
  }
  k::softmax_over_arrays(in_ptr.data(), out_ptr.data(), E, logits[0].numel());

  Tensor<T> fused = Tensor<T>::zeros_like(alphas[0]);
  for (int e = 0; e < E; ++e)
    k::vfma(alphas[e].data(), gates[e].data(), fused.data(), fused.numel());

  Tensor<T> out = fuse.forward(fused, cache ? &cache->c_fuse : nullptr);
  add_inplace(out, fused);
  if (cache) cache->gates = gates;
  if (probe) probe->gates = gates;
  return out;
}

template <class T>
std::vector<Tensor<T>> MoEFS<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  int E = cfg_.num_experts;
  Tensor<T> dfused = fuse.backward(cache.c_fuse, dy);
  add_inplace(dfused, dy);

  std::vector<Tensor<T>> dalphas(E);
  std::vector<Tensor<T>> dgates(E);
  Tensor<T> dot_sum = Tensor<T>::zeros_like(dy);
  for (int e = 0; e < E; ++e) {
    dalphas[e] = mul(dfused, cache.gates[e]);
    dgates[e] = mul(dfused, cache.inputs[e]);
    k::vfma(dgates[e].data(), cache.gates[e].data(), dot_sum.data(), dot_sum.numel());
  }
  // Softmax backward per element over the expert axis:
  // dlogit_e = g_e * (dg_e - sum_k dg_k g_k)
  for (int e = 0; e < E; ++e) {
    Tensor<T> dlogit(dy.n(), dy.c(), dy.h(), dy.w());
    k::vsub(dgates[e].data(), dot_sum.data(), dlogit.data(), dlogit.numel());
    k::vmul(dlogit.data(), cache.gates[e].data(), dlogit.data(), dlogit.numel());
    add_inplace(dalphas[e], experts[e].backward(cache.c_experts[e], dlogit));
  }
  return dalphas;
}

// ---------------------------------------------------------------------------
// SS-ReM stage
// ---------------------------------------------------------------------------

template <class T>
SSReM<T>::SSReM(const MSGMConfig& msgm_cfg, const ESAMConfig& esam_cfg) {
  msgm_cfg.validate();
  esam_cfg.validate();
  SSIU_CHECK(msgm_cfg.channels == esam_cfg.channels, "stage sub-block channel mismatch");
  ln1 = LayerNormChannel<T>(msgm_cfg.channels);
  ln2 = LayerNormChannel<T>(msgm_cfg.channels);
  msgm1 = MSGM<T>(msgm_cfg);
  msgm2 = MSGM<T>(msgm_cfg);
  msgm3 = MSGM<T>(msgm_cfg);
  msgm4 = MSGM<T>(msgm_cfg);
  esam = ESAM<T>(esam_cfg);
}

template <class T>
Tensor<T> SSReM<T>::forward(const Tensor<T>& alpha, const Tensor<T>& f_y, Cache* cache,
                            AttentionProbe<T>* probe) const {
  SSIU_CHECK(alpha.shape() == f_y.shape(),
             "stage inputs must share shape, got " << alpha.shape().str() << " vs "
                                                   << f_y.shape().str());
  Tensor<T> z = msgm1.forward(ln1.forward(alpha, cache ? &cache->c_ln1 : nullptr),
                              cache ? &cache->c_m1 : nullptr);
  Tensor<T> beta = msgm2.forward(ln2.forward(alpha, cache ? &cache->c_ln2 : nullptr),
                                 cache ? &cache->c_m2 : nullptr);
  Tensor<T> vhat = add3(z, alpha, f_y);
  Tensor<T> v = esam.forward(vhat, cache ? &cache->c_esam : nullptr, probe);
  add_inplace(v, vhat);
  Tensor<T> sum3 = add(v, beta);
  Tensor<T> ahat = msgm3.forward(sum3, cache ? &cache->c_m3 : nullptr);
  add_inplace(ahat, beta);
  Tensor<T> out = msgm4.forward(ahat, cache ? &cache->c_m4 : nullptr);
  add_inplace(out, ahat);
  if (cache) {
    cache->z = z;
    cache->beta = beta;
  }
  return out;
}

template <class T>
Tensor<T> SSReM<T>::backward(const Cache& cache, const Tensor<T>& dout, Tensor<T>& dfy_accum) {
  // out = msgm4(ahat) + ahat
  Tensor<T> dahat = msgm4.backward(cache.c_m4, dout);
  add_inplace(dahat, dout);
  // ahat = msgm3(v + beta) + beta
  Tensor<T> dsum3 = msgm3.backward(cache.c_m3, dahat);
  Tensor<T> dbeta = add(dsum3, dahat);
  // v = esam(vhat) + vhat
  Tensor<T> dvhat = esam.backward(cache.c_esam, dsum3);
  add_inplace(dvhat, dsum3);
  // vhat = z + alpha + f_y
  add_inplace(dfy_accum, dvhat);
  Tensor<T> dalpha = dvhat.clone();
  // beta path
  add_inplace(dalpha, ln2.backward(cache.c_ln2, msgm2.backward(cache.c_m2, dbeta)));
  // z path
  add_inplace(dalpha, ln1.backward(cache.c_ln1, msgm1.backward(cache.c_m1, dvhat)));
  return dalpha;
}

// Explicit instantiations.
template class MSGM<float>;
template class MSGM<double>;
template class MoEFS<float>;
template class MoEFS<double>;
template class SSReM<float>;
template class SSReM<double>;

}  // namespace ssiu::nn
