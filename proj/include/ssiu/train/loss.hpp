// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0
//
// Composite objective: mean absolute error plus lambda_f times an L1
// distance in the 2-D DFT domain. The frequency term uses unnormalized
// transforms; "complex" mode averages |dRe| and |dIm| over all coefficients,
// "amplitude" mode compares magnitude spectra instead.

#pragma once

#include <string>

#include "ssiu/core/tensor.hpp"

namespace ssiu::train {

enum class FFTLossMode { complex_l1, amplitude_l1 };

FFTLossMode fft_mode_from_string(const std::string& s);

template <class T>
double loss_l1(const Tensor<T>& pred, const Tensor<T>& gt);

// Gradient of loss_l1 with respect to pred, scaled by `scale`.
template <class T>
Tensor<T> loss_l1_grad(const Tensor<T>& pred, const Tensor<T>& gt, T scale = T(1));

template <class T>
double loss_fft(const Tensor<T>& pred, const Tensor<T>& gt,
                FFTLossMode mode = FFTLossMode::complex_l1);

template <class T>
Tensor<T> loss_fft_grad(const Tensor<T>& pred, const Tensor<T>& gt, T scale = T(1),
                        FFTLossMode mode = FFTLossMode::complex_l1);

// loss_l1 + lambda_f * loss_fft
template <class T>
double total_loss(const Tensor<T>& pred, const Tensor<T>& gt, double lambda_f,
                  FFTLossMode mode = FFTLossMode::complex_l1);

}  // namespace ssiu::train
