// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/core/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace ssiu {

namespace {

int default_threads() {
  if (const char* env = std::getenv("SSIU_NUM_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(hc) : 1;
}

std::atomic<int> g_num_threads{0};

thread_local bool tl_in_parallel = false;

// Fork-join pool with one statically assigned part per worker. Helper i
// always executes part i of the current job, the calling thread executes
// part 0, so the index->thread mapping is a pure function of (range, worker
// count) and never depends on scheduling.
class Pool {
 public:
  static Pool& instance() {
    static Pool p;
    return p;
  }

  void run(int parts, int64_t begin, int64_t end,
           const std::function<void(int64_t, int64_t)>& fn) {
    ensure(parts - 1);
    {
      std::unique_lock<std::mutex> lk(m_);
      fn_ = &fn;
      begin_ = begin;
      end_ = end;
      chunk_ = (end - begin + parts - 1) / parts;
      parts_ = parts;
      finished_ = 1;  // part 0 accounted by the caller
      epoch_++;
      cv_.notify_all();
    }
    work_part(0, fn);
    std::unique_lock<std::mutex> lk(m_);
    done_cv_.wait(lk, [&] { return finished_ == parts_; });
    fn_ = nullptr;
  }

 private:
  void work_part(int part, const std::function<void(int64_t, int64_t)>& fn) {
    int64_t b = begin_ + int64_t(part) * chunk_;
    int64_t e = b + chunk_ < end_ ? b + chunk_ : end_;
    if (b < e) {
      tl_in_parallel = true;
      fn(b, e);
      tl_in_parallel = false;
    }
  }

  void ensure(int helpers) {
    std::unique_lock<std::mutex> lk(m_);
    while (int(threads_.size()) < helpers) {
      int id = int(threads_.size()) + 1;
      threads_.emplace_back([this, id] { helper_loop(id); });
    }
  }

  void helper_loop(int id) {
    uint64_t seen = 0;
    for (;;) {
      const std::function<void(int64_t, int64_t)>* fn = nullptr;
      int parts = 0;
      {
        std::unique_lock<std::mutex> lk(m_);
        cv_.wait(lk, [&] { return stop_ || (epoch_ != seen && fn_ != nullptr); });
        if (stop_) return;
        seen = epoch_;
        fn = fn_;
        parts = parts_;
      }
      if (id < parts) {
        work_part(id, *fn);
        std::unique_lock<std::mutex> lk(m_);
        finished_++;
        if (finished_ == parts_) done_cv_.notify_all();
      }
    }
  }

  Pool() = default;
  ~Pool() {
    {
      std::unique_lock<std::mutex> lk(m_);
      stop_ = true;
      cv_.notify_all();
    }
    for (auto& t : threads_) t.join();
  }

  std::mutex m_;
  std::condition_variable cv_, done_cv_;
  std::vector<std::thread> threads_;
  const std::function<void(int64_t, int64_t)>* fn_ = nullptr;
  int64_t begin_ = 0, end_ = 0, chunk_ = 0;
  int parts_ = 0;
  int finished_ = 0;
  uint64_t epoch_ = 0;
  bool stop_ = false;
};

}  // namespace

int num_threads() {
  int n = g_num_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = default_threads();
    g_num_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_num_threads(int n) { g_num_threads.store(n >= 1 ? n : 1, std::memory_order_relaxed); }

void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t, int64_t)>& fn) {
  if (end <= begin) return;
  int workers = num_threads();
  int64_t total = end - begin;
  if (total < workers) workers = int(total);
  if (workers <= 1 || tl_in_parallel) {
    fn(begin, end);
    return;
  }
  Pool::instance().run(workers, begin, end, fn);
}

}  // namespace ssiu
