// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/train/trainer.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "ssiu/eval/metrics.hpp"
#include "ssiu/kernels/kernels.hpp"
#include "ssiu/model/checkpoint.hpp"

namespace ssiu::train {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  SSIU_CHECK(batch_size >= 1 && micro_batch >= 1, "batch sizes must be >= 1");
  SSIU_CHECK(patch_lr >= 1, "patch_lr must be >= 1");
  SSIU_CHECK(total_iters >= 1, "total_iters must be >= 1");
  SSIU_CHECK(lr_init >= lr_final && lr_final > 0.0, "need lr_init >= lr_final > 0");
  SSIU_CHECK(lambda_f >= 0.0, "lambda_f must be >= 0");
  SSIU_CHECK(checkpoint_every >= 1, "checkpoint_every must be >= 1");
  SSIU_CHECK(num_workers >= 0, "num_workers must be >= 0");
  SSIU_CHECK(image_cache >= 1, "image_cache must be >= 1");
  fft_mode_from_string(fft_mode);
}

json TrainConfig::to_json() const {
  json j;
  j["batch_size"] = batch_size;
  j["micro_batch"] = micro_batch;
  j["patch_lr"] = patch_lr;
  j["total_iters"] = total_iters;
  j["lr_init"] = lr_init;
  j["lr_final"] = lr_final;
  j["lambda_f"] = lambda_f;
  j["fft_mode"] = fft_mode;
  j["adam"] = {{"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}};
  j["seed"] = seed;
  j["checkpoint_every"] = checkpoint_every;
  j["num_workers"] = num_workers;
  j["image_cache"] = image_cache;
  j["grad_clip"] = grad_clip;
  j["grad_clip_norm"] = grad_clip_norm;
  return j;
}

TrainConfig TrainConfig::from_json(const json& j) {
  static const std::set<std::string> allowed = {
      "batch_size", "micro_batch", "patch_lr",  "total_iters",      "lr_init",
      "lr_final",   "lambda_f",    "fft_mode",  "adam",             "seed",
      "checkpoint_every", "num_workers", "image_cache", "grad_clip", "grad_clip_norm"};
  SSIU_CHECK(j.is_object(), "train config must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    SSIU_CHECK(allowed.count(it.key()) > 0, "unknown config key 'train." << it.key() << "'");
  TrainConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.micro_batch = j.value("micro_batch", c.micro_batch);
  c.patch_lr = j.value("patch_lr", c.patch_lr);
  c.total_iters = j.value("total_iters", c.total_iters);
  c.lr_init = j.value("lr_init", c.lr_init);
  c.lr_final = j.value("lr_final", c.lr_final);
  c.lambda_f = j.value("lambda_f", c.lambda_f);
  c.fft_mode = j.value("fft_mode", c.fft_mode);
  if (j.contains("adam")) {
    const json& a = j.at("adam");
    for (auto it = a.begin(); it != a.end(); ++it)
      SSIU_CHECK(it.key() == "beta1" || it.key() == "beta2" || it.key() == "eps",
                 "unknown config key 'train.adam." << it.key() << "'");
    c.adam.beta1 = a.value("beta1", c.adam.beta1);
    c.adam.beta2 = a.value("beta2", c.adam.beta2);
    c.adam.eps = a.value("eps", c.adam.eps);
  }
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.num_workers = j.value("num_workers", c.num_workers);
  c.image_cache = j.value("image_cache", c.image_cache);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.grad_clip_norm = j.value("grad_clip_norm", c.grad_clip_norm);
  c.validate();
  return c;
}

double lr_at(int64_t iter, const TrainConfig& cfg) {
  SSIU_CHECK(iter >= 0 && iter <= cfg.total_iters,
             "iteration " << iter << " outside [0, " << cfg.total_iters << "]");
  double t = double(iter) / double(cfg.total_iters);
  return cfg.lr_final + 0.5 * (cfg.lr_init - cfg.lr_final) * (1.0 + std::cos(M_PI * t));
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <class T>
Adam<T>::Adam(nn::ParamRefs<T> refs, const AdamConfig& cfg) : refs_(std::move(refs)), cfg_(cfg) {
  m_.reserve(refs_.size());
  v_.reserve(refs_.size());
  for (auto& [name, p] : refs_) {
    m_.push_back(Tensor<T>::zeros_like(p->value));
    v_.push_back(Tensor<T>::zeros_like(p->value));
  }
}

template <class T>
void Adam<T>::step(double lr) {
  ++t_;
  T bc1 = T(1) - T(std::pow(cfg_.beta1, double(t_)));
  T bc2 = T(1) - T(std::pow(cfg_.beta2, double(t_)));
  for (size_t i = 0; i < refs_.size(); ++i) {
    nn::Param<T>* p = refs_[i].second;
    p->ensure_grad();
    kernels::adam_step(p->value.data(), p->grad.data(), m_[i].data(), v_[i].data(),
                       p->value.numel(), T(lr), T(cfg_.beta1), T(cfg_.beta2), T(cfg_.eps), bc1,
                       bc2);
  }
}

template class Adam<float>;
template class Adam<double>;

// ---------------------------------------------------------------------------
// BatchSampler
// ---------------------------------------------------------------------------

struct BatchSampler::Prefetcher {
  std::vector<std::thread> workers;
  std::mutex mu;
  std::condition_variable produced, space;
  std::map<int64_t, Batch> ready;
  int64_t next_claim = 0;
  int64_t consumed = 0;
  int64_t lookahead = 4;
  bool stop = false;
};

BatchSampler::BatchSampler(const data::DatasetManifest& manifest, int scale,
                           const TrainConfig& cfg)
    : manifest_(manifest), scale_(scale), cfg_(cfg) {
  SSIU_CHECK(!manifest.entries.empty(), "training dataset is empty");
  cache_.resize(manifest.entries.size());
  if (cfg_.num_workers > 0) {
    prefetch_ = std::make_unique<Prefetcher>();
    prefetch_->lookahead = std::max(2, 2 * cfg_.num_workers);
    for (int wkr = 0; wkr < cfg_.num_workers; ++wkr) {
      prefetch_->workers.emplace_back([this] {
        Prefetcher& pf = *prefetch_;
        for (;;) {
          int64_t mine;
          {
            std::unique_lock<std::mutex> lk(pf.mu);
            pf.space.wait(lk, [&] { return pf.stop || pf.next_claim - pf.consumed < pf.lookahead; });
            if (pf.stop) return;
            mine = pf.next_claim++;
          }
          Batch b = make_batch(mine);
          {
            std::unique_lock<std::mutex> lk(pf.mu);
            if (pf.stop) return;
            pf.ready.emplace(mine, std::move(b));
            pf.produced.notify_all();
          }
        }
      });
    }
  }
}

BatchSampler::~BatchSampler() {
  if (prefetch_) {
    {
      std::unique_lock<std::mutex> lk(prefetch_->mu);
      prefetch_->stop = true;
      prefetch_->space.notify_all();
      prefetch_->produced.notify_all();
    }
    for (auto& t : prefetch_->workers) t.join();
  }
}

const data::SRPair& BatchSampler::image(int idx) {
  {
    std::lock_guard<std::mutex> lk(cache_mu_);
    if (cache_[idx].has_value()) return *cache_[idx];
  }
  data::SRPair p = data::load_pair(manifest_.entries[idx], scale_);
  std::lock_guard<std::mutex> lk(cache_mu_);
  if (!cache_[idx].has_value()) {
    if (int(cache_order_.size()) >= cfg_.image_cache) {
      cache_[cache_order_.front()].reset();
      cache_order_.erase(cache_order_.begin());
    }
    cache_[idx] = std::move(p);
    cache_order_.push_back(idx);
  }
  return *cache_[idx];
}

Batch BatchSampler::make_batch(int64_t iter) {
  Rng rng = Rng(cfg_.seed).fork(uint64_t(iter));
  int B = cfg_.batch_size;
  int p = cfg_.patch_lr;
  Batch batch;
  batch.lr = Tensor<float>(B, 3, p, p);
  batch.hr = Tensor<float>(B, 3, p * scale_, p * scale_);
  batch.image_ids.resize(B);
  for (int b = 0; b < B; ++b) {
    int idx = int(rng.uniform_int(int64_t(manifest_.entries.size())));
    batch.image_ids[b] = idx;
    data::SRPair patch = data::sample_patch(image(idx), p, rng);
    patch = data::augment(patch, rng);
    std::memcpy(batch.lr.plane(b, 0), patch.lr.data(), sizeof(float) * patch.lr.numel());
    std::memcpy(batch.hr.plane(b, 0), patch.hr.data(), sizeof(float) * patch.hr.numel());
  }
  return batch;
}

Batch BatchSampler::get(int64_t iter) {
  if (!prefetch_) return make_batch(iter);
  Prefetcher& pf = *prefetch_;
  std::unique_lock<std::mutex> lk(pf.mu);
  pf.consumed = iter;
  pf.space.notify_all();
  pf.produced.wait(lk, [&] { return pf.ready.count(iter) > 0; });
  Batch b = std::move(pf.ready.at(iter));
  pf.ready.erase(iter);
  pf.space.notify_all();
  return b;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

double validation_psnr(model::SSIUModel<float>& model, const data::DatasetManifest& val,
                       int scale) {
  double acc = 0.0;
  int count = 0;
  for (const auto& e : val.entries) {
    data::SRPair pair = data::load_pair(e, scale);
    Tensor<float> pred = model.forward(pair.lr, nullptr);
    data::clamp01(pred);
    double p = eval::psnr_y(pred, pair.hr, scale);
    if (std::isfinite(p)) {
      acc += p;
      ++count;
    }
  }
  return count ? acc / count : 0.0;
}

}  // namespace

TrainResult train(model::SSIUModel<float>& model, const data::DatasetManifest& train_set,
                  const std::optional<data::DatasetManifest>& val_set, const TrainConfig& cfg,
                  const std::string& out_dir) {
  cfg.validate();
  int scale = model.config().scale;
  fs::create_directories(fs::path(out_dir) / "checkpoints");
  fs::create_directories(fs::path(out_dir) / "logs");
  std::ofstream log_file((fs::path(out_dir) / "logs" / "train_log.jsonl").string(),
                         std::ios::trunc);

  BatchSampler sampler(train_set, scale, cfg);
  Adam<float> opt(model.parameters(), cfg.adam);
  FFTLossMode fft_mode = fft_mode_from_string(cfg.fft_mode);

  TrainResult result;
  for (int64_t iter = 0; iter < cfg.total_iters; ++iter) {
    double lr = lr_at(iter, cfg);
    Batch batch = sampler.get(iter);
    model.zero_grads();

    int B = batch.lr.n();
    double l1_acc = 0.0, fft_acc = 0.0;
    for (int s0 = 0; s0 < B; s0 += cfg.micro_batch) {
      int n = std::min(cfg.micro_batch, B - s0);
      Tensor<float> lr_slice = batch.lr.narrow(s0, n);
      Tensor<float> hr_slice = batch.hr.narrow(s0, n);
      typename model::SSIUModel<float>::Cache cache;
      Tensor<float> pred = model.forward(lr_slice, &cache);
      float w = float(n) / float(B);
      l1_acc += loss_l1(pred, hr_slice) * w;
      Tensor<float> dpred = loss_l1_grad(pred, hr_slice, w);
      if (cfg.lambda_f > 0.0) {
        fft_acc += loss_fft(pred, hr_slice, fft_mode) * w;
        nn::add_inplace(dpred,
                        loss_fft_grad(pred, hr_slice, float(cfg.lambda_f) * w, fft_mode));
      }
      model.backward(cache, dpred);
    }
    double loss = l1_acc + cfg.lambda_f * fft_acc;

    if (!std::isfinite(loss)) {
      std::string dump_path = (fs::path(out_dir) / "logs" / "abort_dump.json").string();
      json dump;
      dump["iteration"] = iter;
      dump["lr"] = lr;
      dump["batch_image_ids"] = batch.image_ids;
      dump["loss_l1"] = l1_acc;
      dump["loss_fft"] = fft_acc;
      std::ofstream(dump_path) << dump.dump(2) << "\n";
      throw numerical_error("non-finite loss at iteration " + std::to_string(iter) +
                            "; diagnostics written to " + dump_path);
    }

    if (cfg.grad_clip) {
      double sq = 0.0;
      for (auto& [name, p] : model.parameters()) {
        if (p->grad.empty()) continue;
        const float* g = p->grad.data();
        for (size_t i = 0, e = p->grad.numel(); i < e; ++i) sq += double(g[i]) * g[i];
      }
      double norm = std::sqrt(sq);
      if (norm > cfg.grad_clip_norm) {
        float s = float(cfg.grad_clip_norm / norm);
        for (auto& [name, p] : model.parameters())
          if (!p->grad.empty())
            kernels::vscale(s, p->grad.data(), p->grad.data(), p->grad.numel());
      }
    }

    opt.step(lr);

    TrainLogEntry entry{iter, loss, l1_acc, fft_acc, lr, std::nullopt};
    bool at_checkpoint = (iter + 1) % cfg.checkpoint_every == 0 || iter + 1 == cfg.total_iters;
    if (at_checkpoint) {
      std::string ckpt =
          (fs::path(out_dir) / "checkpoints" / ("iter_" + std::to_string(iter + 1) + ".ckpt"))
              .string();
      model::save_checkpoint(model, ckpt);
      result.final_checkpoint = ckpt;
      if (val_set) {
        entry.val_psnr = validation_psnr(model, *val_set, scale);
        result.final_val_psnr = *entry.val_psnr;
      }
    }

    json line;
    line["iter"] = entry.iter;
    line["loss"] = entry.loss;
    line["loss_l1"] = entry.loss_l1;
    line["loss_fft"] = entry.loss_fft;
    line["lr"] = entry.lr;
    if (entry.val_psnr) line["val_psnr"] = *entry.val_psnr;
    log_file << line.dump() << "\n";
    if (at_checkpoint) log_file.flush();
    result.log.push_back(entry);
  }
  return result;
}

}  // namespace ssiu::train
