// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Loop kernels shared by the FP32 and INT8 networks. Everything is written in
// axpy or blocked-dot form so the compiler can vectorize without fast-math.

#ifndef EZO_SRC_CONV_UTIL_H_
#define EZO_SRC_CONV_UTIL_H_

#include <cstddef>
#include <cstdint>

namespace ezo::detail {

struct ConvGeom {
  size_t in_ch, in_h, in_w;
  size_t kernel, pad;
  size_t out_h, out_w;

  size_t rows() const { return in_ch * kernel * kernel; }
  size_t cols() const { return out_h * out_w; }
};

// col[(c*k + ky)*k + kx][y*out_w + x] = in[c][y + ky - pad][x + kx - pad],
// zero outside the image.
template <typename T>
void im2col(const T* in, const ConvGeom& g, T* col) {
  const size_t cols = g.cols();
  for (size_t c = 0; c < g.in_ch; ++c) {
    const T* plane = in + c * g.in_h * g.in_w;
    for (size_t ky = 0; ky < g.kernel; ++ky) {
      for (size_t kx = 0; kx < g.kernel; ++kx) {
        T* row = col + ((c * g.kernel + ky) * g.kernel + kx) * cols;
        for (size_t y = 0; y < g.out_h; ++y) {
          const ptrdiff_t sy = static_cast<ptrdiff_t>(y + ky) -
                               static_cast<ptrdiff_t>(g.pad);
          T* dst = row + y * g.out_w;
          if (sy < 0 || sy >= static_cast<ptrdiff_t>(g.in_h)) {
            for (size_t x = 0; x < g.out_w; ++x) dst[x] = T{0};
            continue;
          }
          const T* src = plane + static_cast<size_t>(sy) * g.in_w;
          for (size_t x = 0; x < g.out_w; ++x) {
            const ptrdiff_t sx = static_cast<ptrdiff_t>(x + kx) -
                                 static_cast<ptrdiff_t>(g.pad);
            dst[x] = (sx < 0 || sx >= static_cast<ptrdiff_t>(g.in_w))
                         ? T{0}
                         : src[sx];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates col entries back onto the (zeroed) image.
template <typename T>
void col2im_add(const T* col, const ConvGeom& g, T* out) {
  const size_t cols = g.cols();
  for (size_t c = 0; c < g.in_ch; ++c) {
    T* plane = out + c * g.in_h * g.in_w;
    for (size_t ky = 0; ky < g.kernel; ++ky) {
      for (size_t kx = 0; kx < g.kernel; ++kx) {
        const T* row = col + ((c * g.kernel + ky) * g.kernel + kx) * cols;
        for (size_t y = 0; y < g.out_h; ++y) {
          const ptrdiff_t sy = static_cast<ptrdiff_t>(y + ky) -
                               static_cast<ptrdiff_t>(g.pad);
          if (sy < 0 || sy >= static_cast<ptrdiff_t>(g.in_h)) continue;
          T* dst = plane + static_cast<size_t>(sy) * g.in_w;
          const T* src = row + y * g.out_w;
          for (size_t x = 0; x < g.out_w; ++x) {
            const ptrdiff_t sx = static_cast<ptrdiff_t>(x + kx) -
                                 static_cast<ptrdiff_t>(g.pad);
            if (sx >= 0 && sx < static_cast<ptrdiff_t>(g.in_w)) {
              dst[sx] += src[x];
            }
          }
        }
      }
    }
  }
}

// y[i] += a * x[i]
template <typename A, typename X>
inline void axpy(size_t n, A a, const X* x, A* y) {
  for (size_t i = 0; i < n; ++i) y[i] += a * static_cast<A>(x[i]);
}

// Eight independent partial sums keep the FP32 loop vectorizable without
// reassociation flags.
inline float dot(const float* a, const float* b, size_t n) {
  float s[8] = {};
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (size_t k = 0; k < 8; ++k) s[k] += a[i + k] * b[i + k];
  }
  float t = ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
  for (; i < n; ++i) t += a[i] * b[i];
  return t;
}

template <typename A, typename T>
inline A dot_acc(const T* a, const T* b, size_t n) {
  A s{0};
  for (size_t i = 0; i < n; ++i) s += static_cast<A>(a[i]) * static_cast<A>(b[i]);
  return s;
}

// Non-overlapping max pooling of one (C, H, W) sample. routes[o] is the flat
// index inside the sample of the element that produced out[o]; the first
// maximum wins on ties.
template <typename T>
void maxpool_forward(const T* in, size_t ch, size_t h, size_t w, size_t win,
                     T* out, uint32_t* routes) {
  const size_t oh = h / win, ow = w / win;
  for (size_t c = 0; c < ch; ++c) {
    for (size_t y = 0; y < oh; ++y) {
      for (size_t x = 0; x < ow; ++x) {
        size_t best = (c * h + y * win) * w + x * win;
        for (size_t dy = 0; dy < win; ++dy) {
          for (size_t dx = 0; dx < win; ++dx) {
            const size_t idx = (c * h + y * win + dy) * w + x * win + dx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const size_t o = (c * oh + y) * ow + x;
        out[o] = in[best];
        if (routes != nullptr) routes[o] = static_cast<uint32_t>(best);
      }
    }
  }
}

}  // namespace ezo::detail

#endif  // EZO_SRC_CONV_UTIL_H_
