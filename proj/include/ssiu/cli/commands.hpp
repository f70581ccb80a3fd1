// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Subcommand implementations. Each returns a process exit status and writes
// only to the provided streams, so they are directly testable in-process;
// main() is a thin argument-parsing shell around them.

#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace ssiu::cli {

// Run directory layout: <output_dir>/config.json (materialized),
// checkpoints/, logs/, reports/.
int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              bool deterministic, std::ostream& out, std::ostream& err);

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_root,
             const std::string& split, int scale, const std::string& report_dir, int tile,
             std::ostream& out, std::ostream& err);

int cmd_infer(const std::string& checkpoint_path, const std::string& input_path,
              const std::string& output_path, std::ostream& out, std::ostream& err);

int cmd_oracle_check(uint64_t seed, int n_instances, double tolerance, std::ostream& out,
                     std::ostream& err);

int cmd_flops(const std::string& config_path, int out_h, int out_w, std::ostream& out,
              std::ostream& err);

// Honors SSIU_DEVICE (only "cpu" is supported). Returns false and reports
// to err when an unsupported device is requested.
bool check_device(std::ostream& err);

}  // namespace ssiu::cli
