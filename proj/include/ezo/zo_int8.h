// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// 8-bit hybrid training step. The ZO half perturbs with a sparse uniform int8
// direction and updates with the sign of the loss difference, which is
// decided in integer arithmetic from the two logit tensors.

#ifndef EZO_ZO_INT8_H_
#define EZO_ZO_INT8_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ezo/instrumentation.h"
#include "ezo/prng.h"
#include "ezo/qnet.h"

namespace ezo {

enum class SignMode { kInteger, kFloatReference };

struct ZOInt8Config {
  int r_max = 15;
  ZeroProbability p_zero = ZeroProbability::from_numerator(
      (ZeroProbability::kOne * 33 + 50) / 100);  // 0.33
  int bits_zo = 1;
  int bits_bp = 5;
  size_t partition = 0;
  SignMode sign_mode = SignMode::kInteger;
  int ce_frac_bits = 4;

  void validate(const QuantNetwork& net) const;
};

struct Int8StepMetrics {
  int g = 0;
};

// Working values of the last sign_loss_diff call, for inspection.
struct SignEstimatorScratch {
  int s = 0;                      // common exponent per sample, last sample
  std::vector<int64_t> h_alpha;   // (B, K) scaled exponents
  std::vector<int64_t> h_beta;
  std::vector<int64_t> offset;    // p per sample
  std::vector<int64_t> x_alpha;   // clipped exponents, in [0, 10]
  std::vector<int64_t> x_beta;
  std::vector<uint64_t> sum_alpha;  // per-sample power sums
  std::vector<uint64_t> sum_beta;
};

// theta = clamp(theta + k * (m . u), -127, 127) for trainable layers below
// the partition, with mask and values replayed from `seed`.
void perturb_parameters_int8(QuantNetwork& net, size_t partition,
                             uint32_t seed, int k, int r_max,
                             ZeroProbability p_zero);

// Sign of CE(plus) - CE(minus) in integer arithmetic. B = 1 compares the two
// power sums directly; B > 1 compares sums of floor(log2) of the per-sample
// power sums. Ties give 0. Throws for exponent gaps wider than 16.
int sign_loss_diff(const QuantTensor& logits_plus,
                   const QuantTensor& logits_minus,
                   std::span<const int> labels,
                   SignEstimatorScratch* scratch = nullptr);

// Sign of the float cross-entropy difference of the dequantized logits.
int float_reference_sign(const QuantTensor& logits_plus,
                         const QuantTensor& logits_minus,
                         std::span<const int> labels);

// theta = clamp(theta - round_bits(g * z), -127, 127) per layer, with z
// replayed from `seed` and the rounding shift chosen per layer.
void zo_update_int8(QuantNetwork& net, size_t partition, uint32_t seed, int g,
                    int r_max, ZeroProbability p_zero, int bits_zo);

Int8StepMetrics train_step_int8(QuantNetwork& net, const QuantTensor& x,
                                std::span<const int> y,
                                const ZOInt8Config& cfg, uint32_t seed,
                                PhaseTimes* times = nullptr);

}  // namespace ezo

#endif  // EZO_ZO_INT8_H_
