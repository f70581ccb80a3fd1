// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Procedural test images: smooth gradients, anti-aliased geometric shapes,
// thin bars and low-frequency textures. Deterministic per seed; used for
// unit fixtures and for the desk-scale training runs in the acceptance
// suite when no real dataset is mounted.

#pragma once

#include <string>

#include "ssiu/data/image.hpp"

namespace ssiu::test {

data::Image synth_image(uint64_t seed, int h, int w);

// Writes `count` HR images into root/<split>/HR/ as 0001.png.. and returns
// the directory path. Seeds are offset so splits never share content.
void write_synth_split(const std::string& root, const std::string& split, int count, int h, int w,
                       uint64_t seed_base);

}  // namespace ssiu::test
