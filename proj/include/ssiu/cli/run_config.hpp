// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// One structured document drives a run: model + training hyperparameters,
// dataset paths, output directory, seed. Unknown keys are rejected and every
// default is materialized into the copy saved with the run, so the saved
// config fully reproduces it.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ssiu/model/config.hpp"
#include "ssiu/train/trainer.hpp"

namespace ssiu::cli {

struct DataConfig {
  std::string root;
  std::string train_split = "train";
  std::string val_split;  // empty = no validation
  bool regenerate_lr_cache = false;
};

struct RunConfig {
  uint64_t seed = 0;
  std::string output_dir = "runs/default";
  model::SSIUConfig model;
  train::TrainConfig train;
  DataConfig data;

  nlohmann::json to_json() const;  // fully materialized
  static RunConfig from_json(const nlohmann::json& j);

  // Parse a config file and apply dotted-path overrides of the form
  // "train.lambda_f=0" (values parsed as JSON when possible, else strings).
  static RunConfig load(const std::string& path, const std::vector<std::string>& overrides);
};

// Applies one "a.b.c=value" override onto a JSON document.
void apply_override(nlohmann::json& j, const std::string& spec);

}  // namespace ssiu::cli
