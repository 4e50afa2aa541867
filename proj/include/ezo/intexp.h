// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Integer-only powers of two standing in for exp(): exp(d * 2^s) is written
// as 2^(log2(e) * d * 2^s) with log2(e) ~= 47274 * 2^-15, and the base-2
// exponent is kept with `frac_bits` fractional bits.

#ifndef EZO_INTEXP_H_
#define EZO_INTEXP_H_

#include <cstdint>

namespace ezo {

inline constexpr int64_t kLog2eQ15 = 47274;
// Largest retained exponent range above the offset (in whole powers of two).
inline constexpr int kExpWindow = 10;

// floor(47274 * diff * 2^(s - 15 + frac_bits)), via an arithmetic right shift
// when the net shift is negative.
int64_t scaled_log2_diff(int64_t diff, int s, int frac_bits);

// 2^(x / 2^frac_bits) in Q15 for frac_bits in {0, 4} and 0 <= x <= 10 *
// 2^frac_bits; the fractional part comes from a 16-entry table.
uint64_t pow2_q15(int64_t x, int frac_bits);

// floor(log2 n) for n >= 1 via the leading-zero count.
inline int floor_log2(uint64_t n) { return 63 - __builtin_clzll(n); }

}  // namespace ezo

#endif  // EZO_INTEXP_H_
