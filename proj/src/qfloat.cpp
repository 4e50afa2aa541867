// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// The floating-point side of the INT8 code path: input quantization,
// dequantization and the float reference sign. Each counts its float work.

#include <cmath>
#include <stdexcept>

#include "ezo/instrumentation.h"
#include "ezo/loss.h"
#include "ezo/qnet.h"
#include "ezo/qtensor.h"
#include "ezo/zo_int8.h"

namespace ezo {

QuantTensor quantize_input(const Tensor& images) {
  QuantTensor q(images.shape(), -7);
  for (size_t k = 0; k < images.size(); ++k) {
    const float v = images[k];
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw std::domain_error("input pixel outside [0, 1]");
    }
    q.data[k] = static_cast<int8_t>(std::floor(v * 127.0f + 0.5f));
  }
  counters().float_ops += 2 * images.size();
  return q;
}

Tensor dequantize(const QuantTensor& q) {
  Tensor out(q.shape);
  const float scale = std::ldexp(1.0f, q.exponent);
  for (size_t k = 0; k < q.size(); ++k) {
    out[k] = static_cast<float>(q.data[k]) * scale;
  }
  counters().float_ops += q.size();
  return out;
}

int float_reference_sign(const QuantTensor& logits_plus,
                         const QuantTensor& logits_minus,
                         std::span<const int> labels) {
  const double lp = cross_entropy(dequantize(logits_plus), labels);
  const double lm = cross_entropy(dequantize(logits_minus), labels);
  counters().float_ops += 8 * (logits_plus.size() + logits_minus.size());
  return lp > lm ? 1 : (lp < lm ? -1 : 0);
}

}  // namespace ezo
