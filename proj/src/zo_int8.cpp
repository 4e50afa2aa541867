// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Integer-only: this file must not contain floating-point arithmetic. The
// float reference sign lives in qfloat.cpp.

#include "ezo/zo_int8.h"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ezo/intexp.h"

namespace ezo {

void ZOInt8Config::validate(const QuantNetwork& net) const {
  if (r_max < 1 || r_max > 127) {
    throw std::invalid_argument("r_max must lie in [1, 127]");
  }
  if (bits_zo < 1 || bits_zo > 7) {
    throw std::invalid_argument("b_ZO must lie in [1, 7]");
  }
  if (bits_bp < 1 || bits_bp > 7) {
    throw std::invalid_argument("b_BP must lie in [1, 7]");
  }
  if (partition > net.num_layers()) {
    throw std::invalid_argument("partition " + std::to_string(partition) +
                                " exceeds layer count " +
                                std::to_string(net.num_layers()));
  }
  if (ce_frac_bits != 0 && ce_frac_bits != 4) {
    throw std::invalid_argument("ce_frac_bits must be 0 or 4");
  }
}

namespace {

// Calls fn(layer, weights, gen) for trainable layers below the partition,
// sharing one generator so the layer order fixes stream consumption.
template <typename Fn>
void for_each_zo_layer(QuantNetwork& net, size_t partition, uint32_t seed,
                       Fn&& fn) {
  SeededGenerator gen(seed);
  const size_t end = std::min(partition, net.num_layers());
  for (size_t i = 0; i < end; ++i) {
    if (!net.layer(i).has_params()) continue;
    fn(net.weights(i), gen);
  }
}

}  // namespace

void perturb_parameters_int8(QuantNetwork& net, size_t partition,
                             uint32_t seed, int k, int r_max,
                             ZeroProbability p_zero) {
  for_each_zo_layer(net, partition, seed,
                    [&](std::span<int8_t> w, SeededGenerator& gen) {
                      for_each_sparse_int8(
                          gen, w.size(), r_max, p_zero,
                          [&](size_t idx, int8_t z) {
                            w[idx] = clamp_int8(int32_t{w[idx]} + k * z);
                          });
                    });
}

void zo_update_int8(QuantNetwork& net, size_t partition, uint32_t seed, int g,
                    int r_max, ZeroProbability p_zero, int bits_zo) {
  if (g == 0) return;
  if (g != 1 && g != -1) throw std::invalid_argument("g must be -1, 0 or 1");
  if (bits_zo < 1 || bits_zo > 7) {
    throw std::invalid_argument("b_ZO must lie in [1, 7]");
  }
  for_each_zo_layer(
      net, partition, seed, [&](std::span<int8_t> w, SeededGenerator& gen) {
        // First replay finds the layer's largest |g z|, the second applies
        // the rounded update; no per-layer buffer is needed.
        SeededGenerator probe = gen;
        uint64_t max_mag = 0;
        for_each_sparse_int8(probe, w.size(), r_max, p_zero,
                             [&](size_t, int8_t z) {
                               const uint64_t a = z < 0 ? -z : z;
                               max_mag = std::max(max_mag, a);
                             });
        const int b = bitwidth(max_mag);
        const int shift = b > bits_zo ? b - bits_zo : 0;
        const int64_t cap = (int64_t{1} << bits_zo) - 1;
        for_each_sparse_int8(
            gen, w.size(), r_max, p_zero, [&](size_t idx, int8_t z) {
              int64_t step = pseudo_stochastic_round(int64_t{g} * z, shift);
              step = std::clamp<int64_t>(step, -cap, cap);
              w[idx] = clamp_int8(int64_t{w[idx]} - step);
            });
      });
}

int sign_loss_diff(const QuantTensor& logits_plus,
                   const QuantTensor& logits_minus,
                   std::span<const int> labels,
                   SignEstimatorScratch* scratch) {
  const QuantTensor& a = logits_plus;
  const QuantTensor& b = logits_minus;
  if (a.shape.size() != 2 || a.shape != b.shape) {
    throw std::invalid_argument("logit tensors must share a (B, K) shape");
  }
  const size_t batch = a.shape[0], k = a.shape[1];
  if (labels.size() != batch) {
    throw std::invalid_argument("label count does not match batch size");
  }
  const int s = std::min(a.exponent, b.exponent);
  const int da = a.exponent - s, db = b.exponent - s;
  if (da > 16 || db > 16) {
    throw std::invalid_argument("logit exponents differ by more than 16");
  }

  SignEstimatorScratch local;
  SignEstimatorScratch& sc = scratch != nullptr ? *scratch : local;
  sc.s = s;
  sc.h_alpha.assign(batch * k, 0);
  sc.h_beta.assign(batch * k, 0);
  sc.x_alpha.assign(batch * k, 0);
  sc.x_beta.assign(batch * k, 0);
  sc.offset.assign(batch, 0);
  sc.sum_alpha.assign(batch, 0);
  sc.sum_beta.assign(batch, 0);

  int64_t log_sum_alpha = 0, log_sum_beta = 0;
  for (size_t n = 0; n < batch; ++n) {
    const int y = labels[n];
    if (y < 0 || static_cast<size_t>(y) >= k) {
      throw std::out_of_range("label outside the class range");
    }
    const int8_t* ra = a.data.data() + n * k;
    const int8_t* rb = b.data.data() + n * k;
    const int64_t ya = int64_t{ra[y]} << da;
    const int64_t yb = int64_t{rb[y]} << db;
    int64_t* ha = sc.h_alpha.data() + n * k;
    int64_t* hb = sc.h_beta.data() + n * k;
    int64_t p_max = 0;  // the label term contributes exponent 0
    for (size_t j = 0; j < k; ++j) {
      ha[j] = scaled_log2_diff((int64_t{ra[j]} << da) - ya, s, 0);
      hb[j] = scaled_log2_diff((int64_t{rb[j]} << db) - yb, s, 0);
      p_max = std::max({p_max, ha[j], hb[j]});
    }
    const int64_t p = p_max - kExpWindow;
    sc.offset[n] = p;
    int64_t* xa = sc.x_alpha.data() + n * k;
    int64_t* xb = sc.x_beta.data() + n * k;
    uint64_t sa = 0, sb = 0;
    for (size_t j = 0; j < k; ++j) {
      xa[j] = std::max<int64_t>(ha[j] - p, 0);
      xb[j] = std::max<int64_t>(hb[j] - p, 0);
      sa += uint64_t{1} << xa[j];
      sb += uint64_t{1} << xb[j];
    }
    sc.sum_alpha[n] = sa;
    sc.sum_beta[n] = sb;
    log_sum_alpha += floor_log2(sa);
    log_sum_beta += floor_log2(sb);
  }
  if (batch == 1) {
    const uint64_t sa = sc.sum_alpha[0], sb = sc.sum_beta[0];
    return sa > sb ? 1 : (sa < sb ? -1 : 0);
  }
  return log_sum_alpha > log_sum_beta ? 1
                                      : (log_sum_alpha < log_sum_beta ? -1 : 0);
}

Int8StepMetrics train_step_int8(QuantNetwork& net, const QuantTensor& x,
                                std::span<const int> y,
                                const ZOInt8Config& cfg, uint32_t seed,
                                PhaseTimes* times) {
  cfg.validate(net);
  const size_t C = cfg.partition;
  const bool has_bp = C < net.num_layers();
  auto slot = [times](int64_t PhaseTimes::*m) {
    return times != nullptr ? &(times->*m) : nullptr;
  };
  auto perturb = [&](int k) {
    ScopedPhase t(slot(&PhaseTimes::zo_perturb));
    perturb_parameters_int8(net, C, seed, k, cfg.r_max, cfg.p_zero);
  };

  Int8StepMetrics m;
  QuantActivationCache cache;
  perturb(+1);
  QuantTensor plus, minus;
  {
    ScopedPhase t(slot(&PhaseTimes::forward));
    plus = q_forward(net, x);
  }
  perturb(-2);
  {
    ScopedPhase t(slot(&PhaseTimes::forward));
    minus = q_forward(net, x, has_bp ? &cache : nullptr, C);
  }
  {
    ScopedPhase t(slot(&PhaseTimes::loss));
    m.g = cfg.sign_mode == SignMode::kInteger
              ? sign_loss_diff(plus, minus, y)
              : float_reference_sign(plus, minus, y);
  }
  perturb(+1);
  {
    ScopedPhase t(slot(&PhaseTimes::zo_update));
    zo_update_int8(net, C, seed, m.g, cfg.r_max, cfg.p_zero, cfg.bits_zo);
  }
  if (has_bp) {
    ScopedPhase t(slot(&PhaseTimes::bp_backward));
    q_backward_partial(net, cache, y, cfg.bits_bp, cfg.ce_frac_bits);
  }
  return m;
}

}  // namespace ezo
