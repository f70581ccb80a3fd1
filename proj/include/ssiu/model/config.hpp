// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ssiu/nn/attention.hpp"
#include "ssiu/nn/blocks.hpp"

namespace ssiu::model {

// Full architectural configuration. Width defaults are the calibrated values
// committed for the published parameter/FLOP budgets; see configs/.
struct SSIUConfig {
  int scale = 4;  // in {2, 3, 4}
  int channels = 64;
  int num_stages = 9;
  std::vector<int> moe_taps = {3, 6, 9};  // 1-based stage indices, last == num_stages
  std::string attention_mode = "sparse";  // "sparse" (ESAM) or "dense" (SAM ablation)
  bool use_moe_fs = true;
  nn::MSGMConfig msgm{64, 32, 3};
  nn::ESAMConfig esam{64, 3, 3, 8, 2, 4, false};
  nn::MoEFSConfig moe{64, 3};

  void validate() const;

  // Sub-configs with channels/attention-mode propagated from the top level.
  nn::MSGMConfig msgm_resolved() const;
  nn::ESAMConfig esam_resolved() const;
  nn::MoEFSConfig moe_resolved() const;

  nlohmann::json to_json() const;
  // Strict parse: unknown keys are rejected.
  static SSIUConfig from_json(const nlohmann::json& j);

  static SSIUConfig defaults_for_scale(int scale);
};

}  // namespace ssiu::model
