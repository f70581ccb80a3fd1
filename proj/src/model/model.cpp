// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/model/model.hpp"

#include <algorithm>

namespace ssiu::model {

using ssiu::Tensor;

template <class T>
SSIUModel<T>::SSIUModel(const SSIUConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  int C = cfg.channels;
  shallow = nn::Conv2d<T>(3, C, 3);
  stages.clear();
  stages.reserve(cfg.num_stages);
  for (int t = 0; t < cfg.num_stages; ++t)
    stages.emplace_back(cfg.msgm_resolved(), cfg.esam_resolved());
  if (cfg.use_moe_fs) moe = nn::MoEFS<T>(cfg.moe_resolved());
  head_up = nn::Conv2d<T>(C, C * cfg.scale * cfg.scale, 1);
  ps = nn::PixelShuffle<T>(cfg.scale);
  head_out = nn::Conv2d<T>(C, 3, 3);
}

template <class T>
Tensor<T> SSIUModel<T>::forward(const Tensor<T>& y, Cache* cache, const Probes* probes) const {
  SSIU_CHECK(y.c() == 3, "model expects a 3-channel input, got " << y.c());
  int s = cfg_.scale;
  if (cache) cache->c_stages.resize(cfg_.num_stages);
  nn::AttentionProbe<T>* ap = probes ? probes->attention : nullptr;

  Tensor<T> fy = shallow.forward(y, cache ? &cache->c_shallow : nullptr);
  Tensor<T> a = fy;
  std::vector<Tensor<T>> taps;
  for (int t = 0; t < cfg_.num_stages; ++t) {
    a = stages[t].forward(a, fy, cache ? &cache->c_stages[t] : nullptr, ap);
    if (cfg_.use_moe_fs &&
        std::find(cfg_.moe_taps.begin(), cfg_.moe_taps.end(), t + 1) != cfg_.moe_taps.end())
      taps.push_back(a);
  }
  Tensor<T> fx = cfg_.use_moe_fs
                     ? moe.forward(taps, cache ? &cache->c_moe : nullptr,
                                   probes ? probes->moe : nullptr)
                     : a;
  Tensor<T> s1 = nn::add(fx, fy);
  Tensor<T> h = head_up.forward(s1, cache ? &cache->c_head_up : nullptr);
  h = ps.forward(h, cache ? &cache->c_ps : nullptr);
  h = nn::Gelu<T>::forward(h, cache ? &cache->c_gelu : nullptr);
  h = head_out.forward(h, cache ? &cache->c_head_out : nullptr);
  Tensor<T> up =
      nn::BilinearResize<T>::forward(y, y.h() * s, y.w() * s, cache ? &cache->c_up : nullptr);
  return nn::add(h, up);
}

template <class T>
Tensor<T> SSIUModel<T>::backward(const Cache& cache, const Tensor<T>& dout) {
  Tensor<T> dh = head_out.backward(cache.c_head_out, dout);
  dh = nn::Gelu<T>::backward(cache.c_gelu, dh);
  dh = ps.backward(cache.c_ps, dh);
  Tensor<T> ds1 = head_up.backward(cache.c_head_up, dh);
  Tensor<T> dfy = ds1.clone();

  Tensor<T> da;
  std::vector<Tensor<T>> dtaps;
  if (cfg_.use_moe_fs) {
    dtaps = moe.backward(cache.c_moe, ds1);
    da = Tensor<T>::zeros_like(ds1);
  } else {
    da = ds1.clone();
  }
  for (int t = cfg_.num_stages - 1; t >= 0; --t) {
    if (cfg_.use_moe_fs) {
      auto it = std::find(cfg_.moe_taps.begin(), cfg_.moe_taps.end(), t + 1);
      if (it != cfg_.moe_taps.end())
        nn::add_inplace(da, dtaps[size_t(it - cfg_.moe_taps.begin())]);
    }
    da = stages[t].backward(cache.c_stages[t], da, dfy);
  }
  nn::add_inplace(dfy, da);  // alpha^0 = f_y
  Tensor<T> din = shallow.backward(cache.c_shallow, dfy);
  nn::add_inplace(din, nn::BilinearResize<T>::backward(cache.c_up, dout));
  return din;
}

template <class T>
nn::ParamRefs<T> SSIUModel<T>::parameters() {
  nn::ParamRefs<T> refs;
  shallow.collect_params(refs, "shallow");
  for (size_t t = 0; t < stages.size(); ++t)
    stages[t].collect_params(refs, "stage" + std::to_string(t));
  if (cfg_.use_moe_fs) moe.collect_params(refs, "moe");
  head_up.collect_params(refs, "head.up");
  head_out.collect_params(refs, "head.out");
  return refs;
}

template <class T>
size_t SSIUModel<T>::parameter_count() {
  return nn::count_params(parameters());
}

template <class T>
void SSIUModel<T>::zero_grads() {
  for (auto& [name, p] : parameters()) p->zero_grad();
}

template <class T>
SSIUModel<T> build_model(const SSIUConfig& cfg, uint64_t seed) {
  SSIUModel<T> m(cfg);
  Rng rng(seed);
  for (auto& [name, p] : m.parameters()) {
    if (name.ends_with(".weight")) {
      nn::init_conv_weight(*p, rng, 0.02);
    } else if (name.ends_with(".gamma")) {
      p->value.fill(T(1));
    } else {
      p->value.fill(T(0));  // biases and layer-norm shifts
    }
  }
  return m;
}

template class SSIUModel<float>;
template class SSIUModel<double>;
template SSIUModel<float> build_model(const SSIUConfig&, uint64_t);
template SSIUModel<double> build_model(const SSIUConfig&, uint64_t);

}  // namespace ssiu::model
