// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// 8-bit values with one power-of-two scale per tensor (value = v * 2^exponent)
// and the integer rounding used to get back to 8 bits.

#ifndef EZO_QTENSOR_H_
#define EZO_QTENSOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ezo/tensor.h"

namespace ezo {

struct QuantTensor {
  Shape shape;
  std::vector<int8_t> data;  // every element in [-127, 127]
  int exponent = 0;

  QuantTensor() = default;
  QuantTensor(Shape s, int exp)
      : shape(std::move(s)), data(shape_size(shape), 0), exponent(exp) {}
  QuantTensor(Shape s, std::vector<int8_t> d, int exp);

  size_t size() const { return data.size(); }
  size_t bytes() const { return data.size(); }
};

struct Accum32 {
  Shape shape;
  std::vector<int32_t> data;
  int exponent = 0;

  Accum32() = default;
  Accum32(Shape s, int exp)
      : shape(std::move(s)), data(shape_size(shape), 0), exponent(exp) {}

  size_t size() const { return data.size(); }
  size_t bytes() const { return data.size() * sizeof(int32_t); }
};

// floor(log2 m) + 1, and 0 for m == 0.
inline int bitwidth(uint64_t m) {
  return m == 0 ? 0 : 64 - __builtin_clzll(m);
}

// Shifts |v| right by `shift` bits and rounds using the discarded bits: with
// u the upper ceil(shift/2) of them and w the lower floor(shift/2) (as a plain
// number), the magnitude is incremented iff u > w. The sign is reapplied, so
// rounding is symmetric and never flips sign.
int64_t pseudo_stochastic_round(int64_t v, int shift);

inline int8_t clamp_int8(int64_t v) {
  return static_cast<int8_t>(v > 127 ? 127 : (v < -127 ? -127 : v));
}

// Reduces an accumulator to 8 bits: b = bitwidth(max |v|); when b > 7 every
// value is rounded right by b - 7 and the exponent grows by the same amount.
QuantTensor requantize(const Accum32& acc);
QuantTensor requantize(std::span<const int64_t> values, Shape shape,
                       int exponent);

// Rounds `acc` so its largest magnitude fits `bits` bits: shift =
// max(0, bitwidth(max |acc|) - bits), then pseudo-stochastic rounding and a
// clamp to +-(2^bits - 1). Returns the shift applied.
int round_to_bits(std::span<const int64_t> acc, int bits,
                  std::span<int32_t> out);

// Reconstructs real values; counts one float operation per element.
Tensor dequantize(const QuantTensor& q);

}  // namespace ezo

#endif  // EZO_QTENSOR_H_
