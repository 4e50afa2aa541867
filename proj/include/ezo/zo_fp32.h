// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// FP32 hybrid training step: layers below the partition are updated with a
// two-point (SPSA) zeroth-order estimate whose random direction is replayed
// from a seed, layers at and above it with backpropagation.

#ifndef EZO_ZO_FP32_H_
#define EZO_ZO_FP32_H_

#include <cstdint>
#include <optional>
#include <span>

#include "ezo/instrumentation.h"
#include "ezo/network.h"
#include "ezo/optim.h"

namespace ezo {

// Which parameter point the backprop half sees.
enum class BpSource {
  kMinus,  // cache of the theta - eps*z forward (default, two forwards)
  kPlus,   // cache of the theta + eps*z forward
  kThird,  // extra forward at the restored theta (three forwards)
};

struct ZOConfig {
  float eps = 1e-3f;
  float lr = 1e-2f;
  // Learning rate for the backprop layers; unset means `lr`.
  std::optional<float> lr_bp;
  size_t partition = 0;
  std::optional<float> g_clip = 10.0f;
  bool merge_perturb_update = true;
  BpSource bp_source = BpSource::kMinus;

  void validate(const Network& net) const;
};

struct StepMetrics {
  double loss_plus = 0;
  double loss_minus = 0;
  float g = 0;
  // Loss at the point the backprop gradients were taken (NaN without BP).
  double bp_loss = 0;
  bool skipped = false;
};

// theta_l += k * eps * z_l for every trainable layer l < partition, z drawn
// layer by layer (weight, then bias) from a generator seeded with `seed`.
void perturb_parameters(Network& net, size_t partition, uint32_t seed,
                        float k, float eps);

// clamp((loss_plus - loss_minus) / (2 eps), +-g_clip). Throws
// std::domain_error for non-finite losses.
float zo_gradient(double loss_plus, double loss_minus, float eps,
                  std::optional<float> g_clip);

// merged: parameters hold theta - eps*z and become theta + (eps - lr*g) z.
// unmerged: parameters hold theta and become theta - lr*g*z.
void zo_update(Network& net, size_t partition, uint32_t seed, float lr,
               float g, float eps, bool merged);

// One full step on (x, y). Parameters below the partition end at
// theta - lr*g*z; the rest take one optimizer step. A non-finite perturbed
// loss restores theta and skips the step.
StepMetrics train_step(Network& net, const Tensor& x, std::span<const int> y,
                       const ZOConfig& cfg, uint32_t seed, Optimizer& opt,
                       PhaseTimes* times = nullptr);

}  // namespace ezo

#endif  // EZO_ZO_FP32_H_
