// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/intexp.h"

#include <stdexcept>

namespace ezo {

namespace {
// round(2^15 * 2^(i/16))
constexpr uint64_t kPow2FracQ15[16] = {
    32768, 34219, 35734, 37316, 38968, 40693, 42495, 44376,
    46341, 48393, 50535, 52773, 55109, 57549, 60097, 62757,
};
}  // namespace

int64_t scaled_log2_diff(int64_t diff, int s, int frac_bits) {
  const int shift = s - 15 + frac_bits;
  const int64_t prod = kLog2eQ15 * diff;
  if (shift >= 0) {
    if (shift > 20) throw std::overflow_error("logit exponent too large");
    return prod * (int64_t{1} << shift);
  }
  if (shift < -62) return prod < 0 ? -1 : 0;
  return prod >> -shift;  // arithmetic shift: floor
}

uint64_t pow2_q15(int64_t x, int frac_bits) {
  if (frac_bits != 0 && frac_bits != 4) {
    throw std::invalid_argument("pow2_q15 supports 0 or 4 fractional bits");
  }
  if (x < 0 || x > (int64_t{kExpWindow} << frac_bits)) {
    throw std::out_of_range("pow2_q15 exponent outside the window");
  }
  if (frac_bits == 0) return uint64_t{1} << (15 + x);
  return kPow2FracQ15[x & 15] << (x >> 4);
}

}  // namespace ezo
