// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ssiu/data/image.hpp"

namespace ssiu::data {

// Reads a PNG as [1,3,H,W] in [0,1]. Grayscale and paletted inputs are
// expanded to RGB (was_gray reports the coercion); alpha is stripped;
// 16-bit depth is reduced to 8.
Image read_png(const std::string& path, bool* was_gray = nullptr);

// Writes 8-bit RGB; values are clamped to [0,1] and rounded.
void write_png(const Image& img, const std::string& path);

}  // namespace ssiu::data
