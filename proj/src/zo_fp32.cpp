// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/zo_fp32.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ezo/loss.h"

namespace ezo {

void ZOConfig::validate(const Network& net) const {
  if (!(eps > 0.0f)) throw std::invalid_argument("eps must be positive");
  if (!(lr > 0.0f)) throw std::invalid_argument("lr must be positive");
  if (lr_bp && !(*lr_bp > 0.0f)) {
    throw std::invalid_argument("lr_bp must be positive");
  }
  if (partition > net.num_layers()) {
    throw std::invalid_argument("partition " + std::to_string(partition) +
                                " exceeds layer count " +
                                std::to_string(net.num_layers()));
  }
  if (g_clip && !(*g_clip > 0.0f)) {
    throw std::invalid_argument("g_clip must be positive");
  }
}

namespace {

// Calls fn(value&, z) over the ZO parameter block in canonical order.
template <typename Fn>
void for_each_zo_param(Network& net, size_t partition, uint32_t seed, Fn&& fn) {
  SeededGenerator gen(seed);
  const size_t end = std::min(partition, net.num_layers());
  for (size_t i = 0; i < end; ++i) {
    if (!net.layer(i).has_params()) continue;
    LayerParams& p = net.params(i);
    float* w = p.weight.data();
    for_each_gaussian(gen, p.weight.size(),
                      [&](size_t k, float z) { fn(w[k], z); });
    if (!p.bias.empty()) {
      float* b = p.bias.data();
      for_each_gaussian(gen, p.bias.size(),
                        [&](size_t k, float z) { fn(b[k], z); });
    }
  }
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void perturb_parameters(Network& net, size_t partition, uint32_t seed,
                        float k, float eps) {
  const float scale = k * eps;
  for_each_zo_param(net, partition, seed,
                    [scale](float& v, float z) { v += scale * z; });
}

float zo_gradient(double loss_plus, double loss_minus, float eps,
                  std::optional<float> g_clip) {
  if (!finite(loss_plus) || !finite(loss_minus)) {
    throw std::domain_error("zeroth-order gradient of a non-finite loss");
  }
  if (!(eps > 0.0f)) throw std::invalid_argument("eps must be positive");
  double g = (loss_plus - loss_minus) / (2.0 * static_cast<double>(eps));
  if (g_clip) g = std::clamp<double>(g, -*g_clip, *g_clip);
  return static_cast<float>(g);
}

void zo_update(Network& net, size_t partition, uint32_t seed, float lr,
               float g, float eps, bool merged) {
  const float scale = merged ? eps - lr * g : -lr * g;
  for_each_zo_param(net, partition, seed,
                    [scale](float& v, float z) { v += scale * z; });
}

StepMetrics train_step(Network& net, const Tensor& x, std::span<const int> y,
                       const ZOConfig& cfg, uint32_t seed, Optimizer& opt,
                       PhaseTimes* times) {
  cfg.validate(net);
  const size_t C = cfg.partition;
  const size_t L = net.num_layers();
  const bool has_bp = C < L;
  auto slot = [times](int64_t PhaseTimes::*m) {
    return times != nullptr ? &(times->*m) : nullptr;
  };
  auto perturb = [&](float k) {
    ScopedPhase t(slot(&PhaseTimes::zo_perturb));
    perturb_parameters(net, C, seed, k, cfg.eps);
  };
  auto run = [&](ActivationCache* cache) {
    ScopedPhase t(slot(&PhaseTimes::forward));
    return cache != nullptr ? forward(net, x, *cache, C) : forward(net, x);
  };
  auto loss_of = [&](const Tensor& logits) {
    ScopedPhase t(slot(&PhaseTimes::loss));
    return cross_entropy(logits, y);
  };

  StepMetrics m;
  m.bp_loss = std::numeric_limits<double>::quiet_NaN();
  ActivationCache cache;
  const bool cache_plus = has_bp && cfg.bp_source == BpSource::kPlus;
  const bool cache_minus = has_bp && cfg.bp_source == BpSource::kMinus;

  perturb(+1.0f);
  m.loss_plus = loss_of(run(cache_plus ? &cache : nullptr));
  if (!finite(m.loss_plus)) {
    perturb(-1.0f);
    m.skipped = true;
    return m;
  }
  perturb(-2.0f);
  m.loss_minus = loss_of(run(cache_minus ? &cache : nullptr));
  if (!finite(m.loss_minus)) {
    perturb(+1.0f);
    m.skipped = true;
    return m;
  }
  m.g = zo_gradient(m.loss_plus, m.loss_minus, cfg.eps, cfg.g_clip);
  if (cache_plus) m.bp_loss = m.loss_plus;
  if (cache_minus) m.bp_loss = m.loss_minus;

  const bool third = has_bp && cfg.bp_source == BpSource::kThird;
  if (cfg.merge_perturb_update && !third) {
    ScopedPhase t(slot(&PhaseTimes::zo_update));
    zo_update(net, C, seed, cfg.lr, m.g, cfg.eps, /*merged=*/true);
  } else {
    perturb(+1.0f);
    if (third) m.bp_loss = loss_of(run(&cache));
    ScopedPhase t(slot(&PhaseTimes::zo_update));
    zo_update(net, C, seed, cfg.lr, m.g, cfg.eps, /*merged=*/false);
  }

  if (has_bp) {
    ScopedPhase t(slot(&PhaseTimes::bp_backward));
    const GradientSet grads = backward_partial(net, cache, y);
    opt.step(net, grads, cfg.lr_bp.value_or(cfg.lr));
  }
  return m;
}

}  // namespace ezo
