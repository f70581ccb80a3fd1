// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace ssiu {

// Number of worker threads used by parallel_for. Defaults to the hardware
// concurrency, overridable via set_num_threads() or SSIU_NUM_THREADS.
int num_threads();
void set_num_threads(int n);

// Static-partition parallel loop over [begin, end). Each index is processed
// by exactly one worker with a fixed chunk assignment, so any computation
// whose outputs are disjoint per index is bit-deterministic regardless of
// thread count or scheduling.
void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace ssiu
