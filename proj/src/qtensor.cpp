// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Integer-only: this file must not contain floating-point arithmetic.

#include "ezo/qtensor.h"

#include <stdexcept>
#include <string>


namespace ezo {

QuantTensor::QuantTensor(Shape s, std::vector<int8_t> d, int exp)
    : shape(std::move(s)), data(std::move(d)), exponent(exp) {
  if (shape_size(shape) != data.size()) {
    throw std::invalid_argument("quantized tensor shape " +
                                shape_string(shape) + " does not match " +
                                std::to_string(data.size()) + " values");
  }
  for (int8_t v : data) {
    if (v == -128) throw std::invalid_argument("int8 value -128 not allowed");
  }
}

int64_t pseudo_stochastic_round(int64_t v, int shift) {
  if (shift < 0 || shift > 62) {
    throw std::invalid_argument("rounding shift out of range");
  }
  if (shift == 0) return v;
  const uint64_t mag = v < 0 ? 0 - static_cast<uint64_t>(v)
                             : static_cast<uint64_t>(v);
  const uint64_t kept = mag >> shift;
  const uint64_t dropped = mag & ((uint64_t{1} << shift) - 1);
  const int low_bits = shift / 2;
  const uint64_t upper = dropped >> low_bits;
  const uint64_t lower = dropped & ((uint64_t{1} << low_bits) - 1);
  const uint64_t rounded = kept + (upper > lower ? 1 : 0);
  return v < 0 ? -static_cast<int64_t>(rounded) : static_cast<int64_t>(rounded);
}

namespace {

template <typename T>
uint64_t max_magnitude(std::span<const T> values) {
  uint64_t m = 0;
  for (T v : values) {
    const uint64_t a = v < 0 ? 0 - static_cast<uint64_t>(static_cast<int64_t>(v))
                             : static_cast<uint64_t>(v);
    if (a > m) m = a;
  }
  return m;
}

template <typename T>
QuantTensor requantize_impl(std::span<const T> values, Shape shape,
                            int exponent) {
  QuantTensor out(std::move(shape), exponent);
  if (out.size() != values.size()) {
    throw std::invalid_argument("accumulator size does not match its shape");
  }
  const int b = bitwidth(max_magnitude(values));
  const int shift = b > 7 ? b - 7 : 0;
  for (size_t k = 0; k < values.size(); ++k) {
    out.data[k] = clamp_int8(pseudo_stochastic_round(values[k], shift));
  }
  out.exponent = exponent + shift;
  return out;
}

}  // namespace

QuantTensor requantize(const Accum32& acc) {
  return requantize_impl<int32_t>(acc.data, acc.shape, acc.exponent);
}

QuantTensor requantize(std::span<const int64_t> values, Shape shape,
                       int exponent) {
  return requantize_impl<int64_t>(values, std::move(shape), exponent);
}

int round_to_bits(std::span<const int64_t> acc, int bits,
                  std::span<int32_t> out) {
  if (bits < 1 || bits > 30) throw std::invalid_argument("bits out of range");
  if (out.size() != acc.size()) {
    throw std::invalid_argument("output size does not match accumulator");
  }
  const int b = bitwidth(max_magnitude(acc));
  const int shift = b > bits ? b - bits : 0;
  const int64_t cap = (int64_t{1} << bits) - 1;
  for (size_t k = 0; k < acc.size(); ++k) {
    int64_t r = pseudo_stochastic_round(acc[k], shift);
    if (r > cap) r = cap;
    if (r < -cap) r = -cap;
    out[k] = static_cast<int32_t>(r);
  }
  return shift;
}

}  // namespace ezo
