// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ssiu/core/tensor.hpp"

namespace ssiu::data {

// An image is a [1, C, H, W] float tensor with values nominally in [0,1].
// Intermediate processing may leave values slightly outside the range;
// clamping happens only at 8-bit export.
using Image = Tensor<float>;

inline void clamp01(Image& img) {
  float* p = img.data();
  for (size_t i = 0, e = img.numel(); i < e; ++i) p[i] = p[i] < 0.f ? 0.f : (p[i] > 1.f ? 1.f : p[i]);
}

Image hflip(const Image& img);
Image rot90(const Image& img, int k);  // k quarter turns counter-clockwise
Image crop(const Image& img, int y0, int x0, int h, int w);

}  // namespace ssiu::data
