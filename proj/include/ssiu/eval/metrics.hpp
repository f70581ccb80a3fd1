// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Y-channel fidelity metrics under the benchmark conventions: BT.601
// studio-swing luminance, border shave before computation, PSNR with peak
// 1.0, single-scale SSIM with an 11x11 sigma=1.5 Gaussian window over valid
// positions.

#pragma once

#include "ssiu/data/image.hpp"

namespace ssiu::eval {

// Y = (65.481 R + 128.553 G + 24.966 B + 16) / 255, output [1,1,H,W].
Tensor<float> rgb_to_y(const data::Image& img);

// 10 log10(1 / MSE) on shaved Y planes; +inf when MSE == 0.
double psnr_y(const data::Image& pred, const data::Image& gt, int shave);

// Mean SSIM over valid 11x11 windows of the shaved Y planes.
double ssim_y(const data::Image& pred, const data::Image& gt, int shave);

}  // namespace ssiu::eval
