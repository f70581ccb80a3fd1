// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssiu/data/dataset.hpp"
#include "ssiu/model/model.hpp"
#include "ssiu/train/loss.hpp"

namespace ssiu::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int batch_size = 40;
  int micro_batch = 8;  // gradient-accumulation slice; does not change results
  int patch_lr = 64;
  int64_t total_iters = 500000;
  double lr_init = 1e-3;
  double lr_final = 1e-6;
  double lambda_f = 0.01;
  std::string fft_mode = "complex";
  AdamConfig adam;
  uint64_t seed = 0;
  int64_t checkpoint_every = 1000;
  int num_workers = 2;      // batch prefetch threads; 0 = synchronous
  int image_cache = 256;    // decoded images kept in memory
  bool grad_clip = false;   // off by default
  double grad_clip_norm = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Cosine annealing between lr_init and lr_final over [0, total_iters].
double lr_at(int64_t iter, const TrainConfig& cfg);

template <class T>
class Adam {
 public:
  Adam() = default;
  Adam(nn::ParamRefs<T> refs, const AdamConfig& cfg);

  // Applies one update from the gradients currently stored in the params.
  void step(double lr);
  int64_t steps_taken() const { return t_; }

 private:
  nn::ParamRefs<T> refs_;
  std::vector<Tensor<T>> m_, v_;
  AdamConfig cfg_;
  int64_t t_ = 0;
};

struct Batch {
  Tensor<float> lr;  // [B,3,p,p]
  Tensor<float> hr;  // [B,3,p*s,p*s]
  std::vector<int> image_ids;
};

// Deterministic batch synthesis: the content of batch `iter` is a pure
// function of (dataset, config, iter), so prefetch parallelism cannot change
// results, only latency.
class BatchSampler {
 public:
  BatchSampler(const data::DatasetManifest& manifest, int scale, const TrainConfig& cfg);
  ~BatchSampler();

  Batch get(int64_t iter);  // batches must be consumed in iteration order

 private:
  Batch make_batch(int64_t iter);
  const data::SRPair& image(int idx);

  data::DatasetManifest manifest_;
  int scale_;
  TrainConfig cfg_;
  struct Prefetcher;
  std::unique_ptr<Prefetcher> prefetch_;
  std::vector<std::optional<data::SRPair>> cache_;
  std::vector<int> cache_order_;
  std::mutex cache_mu_;
};

struct TrainLogEntry {
  int64_t iter;
  double loss, loss_l1, loss_fft, lr;
  std::optional<double> val_psnr;
};

struct TrainResult {
  std::string final_checkpoint;
  std::vector<TrainLogEntry> log;
  double final_val_psnr = 0.0;
};

// Runs the full loop: cosine-annealed Adam over augmented patch batches,
// periodic checkpoints and validation PSNR, line-delimited metrics log under
// out_dir/logs/. Aborts with numerical_error (after writing a diagnostic
// dump) if the loss goes non-finite.
TrainResult train(model::SSIUModel<float>& model, const data::DatasetManifest& train_set,
                  const std::optional<data::DatasetManifest>& val_set, const TrainConfig& cfg,
                  const std::string& out_dir);

}  // namespace ssiu::train
