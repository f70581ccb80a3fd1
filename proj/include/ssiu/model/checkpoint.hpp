// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint archive: magic, version, canonical config JSON, named float32
// tensors, FNV-1a checksum. Little-endian. save -> load -> save is
// byte-stable for the tensor payload.

#pragma once

#include <string>

#include "ssiu/model/model.hpp"

namespace ssiu::model {

void save_checkpoint(SSIUModel<float>& model, const std::string& path);

// Throws io_error on missing file, bad magic, checksum mismatch, or
// name/shape disagreement with the embedded config.
SSIUModel<float> load_checkpoint(const std::string& path);

// Reads only the embedded config.
SSIUConfig peek_checkpoint_config(const std::string& path);

}  // namespace ssiu::model
