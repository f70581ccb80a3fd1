// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace ssiu::kernels {

// Dispatch table for the float path. Entries the AVX2 build does not
// specialize fall back to the scalar reference.
struct FloatTable {
  void (*gemm_nn)(int, int, int, const float*, int, const float*, int, float*, int, bool);
  void (*gemm_nt)(int, int, int, const float*, int, const float*, int, float*, int, bool);
  void (*gemm_tn)(int, int, int, const float*, int, const float*, int, float*, int, bool);
  void (*vadd)(const float*, const float*, float*, size_t);
  void (*vadd3)(const float*, const float*, const float*, float*, size_t);
  void (*vsub)(const float*, const float*, float*, size_t);
  void (*vmul)(const float*, const float*, float*, size_t);
  void (*vfma)(const float*, const float*, float*, size_t);
  void (*axpy)(float, const float*, float*, size_t);
  void (*vscale)(float, const float*, float*, size_t);
  void (*vadd_const)(float, float*, size_t);
  float (*reduce_sum)(const float*, size_t);
  float (*dot)(const float*, const float*, size_t);
  void (*gelu_fwd)(const float*, float*, size_t);
  void (*gelu_bwd)(const float*, const float*, float*, size_t);
  void (*softmax_rows)(float*, int, int);
  void (*softmax_over_arrays)(const float* const*, float* const*, int, size_t);
  void (*adam_step)(float*, const float*, float*, float*, size_t, float, float, float, float,
                    float, float);
  void (*ln_acc_moments)(const float*, float*, float*, size_t);
  void (*ln_finalize)(const float*, const float*, float, float, float*, float*, size_t);
  void (*ln_apply)(const float*, const float*, const float*, float, float, float*, size_t);
  void (*ln_bwd_acc)(const float*, const float*, const float*, const float*, float, float*,
                     float*, size_t);
  void (*ln_bwd_dx)(const float*, const float*, const float*, const float*, float, const float*,
                    const float*, float, float*, size_t);
  void (*ln_param_grad)(const float*, const float*, const float*, const float*, size_t, float*,
                        float*);
  void (*dwconv_plane_fwd)(const float*, int, int, const float*, int, float, float*);
  void (*dwconv_plane_bwd_data)(const float*, int, int, const float*, int, float*);
  void (*dwconv_plane_bwd_w)(const float*, const float*, int, int, int, float*);
};

const FloatTable& scalar_float_table();

#ifdef SSIU_HAVE_AVX2
const FloatTable& avx2_float_table();
#endif

}  // namespace ssiu::kernels
