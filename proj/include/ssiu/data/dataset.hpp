// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bicubic degradation, paired patch sampling and augmentation. The bicubic
// kernel is pinned bit-exactly (Keys, a = -0.5, half-pixel-center mapping,
// edge clamp) because benchmark PSNR depends on it; both LR synthesis and
// any resize-based baseline use this one implementation.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssiu/core/rng.hpp"
#include "ssiu/data/image.hpp"

namespace ssiu::data {

// Keys bicubic with a = -0.5; coordinates map via src = (dst+0.5)*scale-0.5;
// edges replicate. Values may transiently leave [0,1].
Image bicubic_resize(const Image& img, int out_h, int out_w);

struct SRPair {
  Image hr;
  Image lr;
  int scale = 2;
};

// Center-crops HR to dimensions divisible by s and synthesizes LR by bicubic
// downscaling.
SRPair make_pair(const Image& hr, int scale);

// Aligned random crop: LR patch of side patch_lr, HR patch at s x the offset.
SRPair sample_patch(const SRPair& pair, int patch_lr, Rng& rng);

// Independent 0.5-probability horizontal flip and uniform k*90-degree
// rotation, applied identically to both members.
SRPair augment(const SRPair& pair, Rng& rng);

struct ManifestEntry {
  std::string name;
  std::string hr_path;
  std::string lr_path;
};

struct DatasetManifest {
  std::string root;
  std::string split;
  int scale = 2;
  std::vector<ManifestEntry> entries;
};

// Scans root/<split>/HR/*.png, synthesizes missing LR files into
// root/<split>/LR/x<s>/ (8-bit PNG cache), and writes a plain-text index.
// With regenerate == true the LR cache and index are rebuilt.
DatasetManifest load_manifest(const std::string& root, const std::string& split, int scale,
                              bool regenerate = false);

// Loads one pair; HR is center-cropped to a multiple of the scale. Throws
// io_error naming the offending file.
SRPair load_pair(const ManifestEntry& e, int scale);

}  // namespace ssiu::data
