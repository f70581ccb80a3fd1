// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "ssiu/model/config.hpp"

namespace ssiu::model {

// Analytic multiply-accumulate/elementwise accounting for one forward pass,
// mirroring the runtime dataflow exactly (pooled sizes, block grids and
// padding included). See accounting_note() for the counting rules.
struct FlopsReport {
  int64_t total = 0;
  int64_t conv = 0;              // all convolutions incl. bias adds
  int64_t attention_matmul = 0;  // QK^T and AV matmuls
  int64_t attention_module = 0;  // entire attention submodule (pool..upsample)
  int64_t norm = 0;              // layer norms
  int64_t elementwise = 0;       // adds, gates, activations, softmax, resize
  std::string note;              // accounting rules
};

FlopsReport estimate_flops(const SSIUConfig& cfg, int out_h, int out_w);

std::string flops_accounting_note();

}  // namespace ssiu::model
