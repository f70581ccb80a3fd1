// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/data/image.hpp"

namespace ssiu::data {

Image hflip(const Image& img) {
  Image out(img.n(), img.c(), img.h(), img.w());
  int H = img.h(), W = img.w();
  for (int n = 0; n < img.n(); ++n)
    for (int c = 0; c < img.c(); ++c) {
      const float* src = img.plane(n, c);
      float* dst = out.plane(n, c);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) dst[size_t(y) * W + x] = src[size_t(y) * W + (W - 1 - x)];
    }
  return out;
}

Image rot90(const Image& img, int k) {
  k = ((k % 4) + 4) % 4;
  if (k == 0) return img;
  int H = img.h(), W = img.w();
  int oh = (k % 2 == 0) ? H : W;
  int ow = (k % 2 == 0) ? W : H;
  Image out(img.n(), img.c(), oh, ow);
  for (int n = 0; n < img.n(); ++n)
    for (int c = 0; c < img.c(); ++c) {
      const float* src = img.plane(n, c);
      float* dst = out.plane(n, c);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          int oy = 0, ox = 0;
          switch (k) {
            case 1: oy = W - 1 - x; ox = y; break;          // 90 ccw
            case 2: oy = H - 1 - y; ox = W - 1 - x; break;  // 180
            default: oy = x; ox = H - 1 - y; break;         // 270 ccw
          }
          dst[size_t(oy) * ow + ox] = src[size_t(y) * W + x];
        }
    }
  return out;
}

Image crop(const Image& img, int y0, int x0, int h, int w) {
  SSIU_CHECK(y0 >= 0 && x0 >= 0 && y0 + h <= img.h() && x0 + w <= img.w(),
             "crop window out of bounds");
  Image out(img.n(), img.c(), h, w);
  for (int n = 0; n < img.n(); ++n)
    for (int c = 0; c < img.c(); ++c) {
      const float* src = img.plane(n, c);
      float* dst = out.plane(n, c);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          dst[size_t(y) * w + x] = src[size_t(y0 + y) * img.w() + (x0 + x)];
    }
  return out;
}

}  // namespace ssiu::data
