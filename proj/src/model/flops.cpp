// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/model/flops.hpp"

#include "ssiu/nn/attention.hpp"
#include "ssiu/nn/layers.hpp"

namespace ssiu::model {

namespace {

int64_t conv_flops(int cin, int cout, int ksz, int64_t pixels) {
  // 2 ops per MAC plus one bias add per output element.
  return (2 * int64_t(ksz) * ksz * cin + 1) * cout * pixels;
}

int64_t dwconv_flops(int c, int ksz, int64_t pixels) {
  return (2 * int64_t(ksz) * ksz + 1) * c * pixels;
}

}  // namespace

std::string flops_accounting_note() {
  return
      "FLOP accounting: convolutions and attention matmuls count 2 ops per "
      "multiply-accumulate plus 1 per bias add; softmax 5 ops per logit; "
      "layer norm 8 ops per element; GeLU 8 ops per element; elementwise "
      "add/mul 1 op per element; bilinear resize 8 ops per output element; "
      "max pool 1 op per compared element; pixel shuffle is free (data "
      "movement). Q/K/V projections are counted once per (pooled) pixel: "
      "pointwise projections commute with the block partition, so tokens "
      "duplicated by overlap are not re-projected. Input size is "
      "out_size / scale; internal padding for pooling and the block grid is "
      "included.";
}

FlopsReport estimate_flops(const SSIUConfig& cfg, int out_h, int out_w) {
  cfg.validate();
  SSIU_CHECK(out_h >= 1 && out_w >= 1, "flops output size must be >= 1");
  FlopsReport r;
  r.note = flops_accounting_note();

  int s = cfg.scale;
  int C = cfg.channels;
  int h = out_h / s, w = out_w / s;
  SSIU_CHECK(h >= 1 && w >= 1, "output size must be at least one pixel per scale step");
  int64_t P = int64_t(h) * w;
  int64_t Pout = int64_t(out_h) * out_w;

  // Attention submodule geometry (shared by every stage).
  nn::ESAMConfig e = cfg.esam_resolved();
  int H1 = h, W1 = w;
  int64_t pool_ops = 0;
  if (!e.dense) {
    int hp, wp;
    nn::MaxPool2d<float>::out_size(h, e.pool_kernel, e.pool_stride, &hp, &H1);
    nn::MaxPool2d<float>::out_size(w, e.pool_kernel, e.pool_stride, &wp, &W1);
    pool_ops = int64_t(e.pool_kernel) * e.pool_kernel * C * H1 * W1;
  }
  int64_t P1 = int64_t(H1) * W1;
  nn::BlockGrid grid = nn::make_block_grid(H1, W1, e.block_size, e.overlap);
  int64_t n_tok = grid.tokens();
  int64_t tok_total = int64_t(grid.blocks()) * n_tok;

  int64_t esam_qkv = 3 * conv_flops(C, C, 1, P1);
  int64_t esam_psi = conv_flops(C, C, 3, P1);
  int64_t attn_matmul = 2 * 2 * tok_total * n_tok * C;  // QK^T + AV, all heads
  int64_t attn_elem = (5 + 1) * tok_total * n_tok * e.num_heads;  // softmax + scale
  int64_t merge_elem = tok_total * C + P1 * C;  // scatter adds + averaging
  int64_t upsample_elem = e.dense ? 0 : 8 * int64_t(C) * P;
  int64_t esam_total =
      esam_qkv + esam_psi + attn_matmul + attn_elem + merge_elem + upsample_elem + pool_ops;

  // One MSGM.
  nn::MSGMConfig m = cfg.msgm_resolved();
  int hc = m.hidden_channels;
  int64_t msgm_conv = conv_flops(C, hc, 1, P) + conv_flops(C, hc, 1, P) +
                      dwconv_flops(hc, m.dw_kernel, P) + conv_flops(hc, hc, 1, P) +
                      conv_flops(hc, C, 1, P);
  int64_t msgm_elem = 8 * int64_t(hc) * P + int64_t(hc) * P;  // gelu + gate multiply

  int64_t ln_elem = 8 * int64_t(C) * P;
  int64_t stage_skip_elem = 5 * int64_t(C) * P;  // vhat add3 + residuals + beta adds

  int N = cfg.num_stages;
  r.conv = conv_flops(3, C, 3, P)                          // shallow
           + int64_t(N) * (4 * msgm_conv + esam_qkv + esam_psi);
  r.attention_matmul = int64_t(N) * attn_matmul;
  r.attention_module = int64_t(N) * esam_total;
  r.norm = int64_t(N) * 2 * ln_elem;
  r.elementwise = int64_t(N) * (4 * msgm_elem + stage_skip_elem + attn_elem + merge_elem +
                                upsample_elem + pool_ops);

  if (cfg.use_moe_fs) {
    int E = cfg.moe.num_experts;
    r.conv += int64_t(E + 1) * conv_flops(C, C, 1, P);
    r.elementwise += (8 + 2) * int64_t(E) * C * P + int64_t(C) * P;  // gate softmax, sum, residual
  }

  // Reconstruction head + global bilinear residual.
  r.conv += conv_flops(C, C * s * s, 1, P) + conv_flops(C, 3, 3, Pout);
  r.elementwise += int64_t(C) * P        // f_x + f_y
                   + 8 * int64_t(C) * Pout  // gelu after shuffle
                   + 8 * 3 * Pout          // bilinear residual
                   + 3 * Pout;             // final add

  r.total = r.conv + r.attention_matmul + r.norm + r.elementwise;
  return r;
}

}  // namespace ssiu::model
