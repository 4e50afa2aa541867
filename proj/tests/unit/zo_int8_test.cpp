// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/zo_int8.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ezo/instrumentation.h"
#include "ezo/intexp.h"

namespace ezo {
namespace {

const ZeroProbability kDense = ZeroProbability::from_numerator(0);

QuantNetwork small_net() {
  QuantNetwork net({6}, {LayerSpec::fc(6, 8), LayerSpec::relu(),
                         LayerSpec::fc(8, 4)}, -7);
  SeededGenerator gen(4);
  init_quant_parameters(net, gen, 40);
  return net;
}

std::vector<int8_t> all_weights(const QuantNetwork& net) {
  std::vector<int8_t> out;
  for (size_t i : net.trainable_layers()) {
    const auto& d = net.weight(i).data;
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

// z for one scalar parameter, read back by perturbing a zero weight.
int scalar_z(uint32_t seed, int r_max) {
  QuantNetwork probe({1}, {LayerSpec::fc(1, 1)}, -7);
  perturb_parameters_int8(probe, 1, seed, +1, r_max, kDense);
  return probe.weight(0).data[0];
}

TEST(PerturbInt8, AllZeroMaskIsANoOp) {
  QuantNetwork net = small_net();
  const auto before = all_weights(net);
  perturb_parameters_int8(net, 3, 77, +1, 15,
                          ZeroProbability::from_numerator(ZeroProbability::kOne));
  EXPECT_EQ(all_weights(net), before);
}

TEST(PerturbInt8, CycleRestoresUnclampedWeights) {
  QuantNetwork net = small_net();  // |theta| <= 40, r_max 15: no clamping
  const auto before = all_weights(net);
  perturb_parameters_int8(net, 3, 77, +1, 15, kDense);
  EXPECT_NE(all_weights(net), before);
  perturb_parameters_int8(net, 3, 77, -2, 15, kDense);
  perturb_parameters_int8(net, 3, 77, +1, 15, kDense);
  EXPECT_EQ(all_weights(net), before);
}

TEST(PerturbInt8, PartitionLimitsLayers) {
  QuantNetwork net = small_net();
  const auto last = net.weight(2).data;
  perturb_parameters_int8(net, 2, 77, +1, 15, kDense);
  EXPECT_EQ(net.weight(2).data, last);
}

TEST(PerturbInt8, SaturationIsNotUndone) {
  uint32_t seed = 0;
  while (scalar_z(seed, 5) != 5) ++seed;
  QuantNetwork net({1}, {LayerSpec::fc(1, 1)}, -7);
  net.set_weights(0, std::vector<int8_t>{127});
  perturb_parameters_int8(net, 1, seed, +1, 5, kDense);
  EXPECT_EQ(net.weight(0).data[0], 127);
  perturb_parameters_int8(net, 1, seed, -2, 5, kDense);
  perturb_parameters_int8(net, 1, seed, +1, 5, kDense);
  EXPECT_EQ(net.weight(0).data[0], 122);
}

TEST(SignLossDiff, IdenticalLogitsGiveZero) {
  QuantTensor a({3, 4}, {5, -3, 8, 1, 0, 0, 0, 0, 127, -127, 3, 9}, -4);
  std::vector<int> y{0, 1, 2};
  EXPECT_EQ(sign_loss_diff(a, a, y), 0);
}

TEST(SignLossDiff, SingleSampleExample) {
  // alpha: confident and right (small loss); beta: uniform (log 4).
  QuantTensor a({1, 4}, {100, 0, 0, 0}, -3);
  QuantTensor b({1, 4}, {7, 7, 7, 7}, -3);
  const int y = 0;
  SignEstimatorScratch sc;
  EXPECT_EQ(sign_loss_diff(a, b, std::span<const int>(&y, 1), &sc), -1);
  EXPECT_EQ(sign_loss_diff(b, a, std::span<const int>(&y, 1)), 1);
  for (int64_t x : sc.x_alpha) {
    EXPECT_GE(x, 0);
    EXPECT_LE(x, kExpWindow);
  }
  EXPECT_EQ(sc.s, -3);
}

TEST(SignLossDiff, HandlesMixedExponents) {
  // Same real values written at different exponents compare as equal.
  QuantTensor a({1, 3}, {40, 10, -20}, -4);
  QuantTensor b({1, 3}, {20, 5, -10}, -3);
  const int y = 1;
  EXPECT_EQ(sign_loss_diff(a, b, std::span<const int>(&y, 1)), 0);
  QuantTensor far({1, 3}, {1, 1, 1}, 20);
  EXPECT_THROW(sign_loss_diff(a, far, std::span<const int>(&y, 1)),
               std::invalid_argument);
}

TEST(SignLossDiff, AgreesWithFloatOnRandomPairs) {
  SeededGenerator gen(12);
  int agree = 0, total = 0;
  for (int t = 0; t < 500; ++t) {
    const int ea = -6 + static_cast<int>(gen.next_u32() % 4);
    const int eb = -6 + static_cast<int>(gen.next_u32() % 4);
    QuantTensor a({32, 10}, ea), b({32, 10}, eb);
    fill_uniform_int8(gen, a.data, 127);
    fill_uniform_int8(gen, b.data, 127);
    std::vector<int> y(32);
    for (auto& v : y) v = static_cast<int>(gen.next_u32() % 10);
    const int ref = float_reference_sign(a, b, y);
    if (ref == 0) continue;
    ++total;
    agree += sign_loss_diff(a, b, y) == ref;
  }
  EXPECT_GE(agree * 10, total * 9) << agree << "/" << total;
}

TEST(ZoUpdateInt8, ZeroSignLeavesWeights) {
  QuantNetwork net = small_net();
  const auto before = all_weights(net);
  zo_update_int8(net, 3, 5, 0, 15, kDense, 1);
  EXPECT_EQ(all_weights(net), before);
}

TEST(ZoUpdateInt8, OneBitStepsOpposeGTimesZ) {
  QuantNetwork net = small_net();
  QuantNetwork zs({6}, net.layers(), -7);  // all-zero weights record z
  perturb_parameters_int8(zs, 3, 5, +1, 63, kDense);
  const auto before = all_weights(net);
  const auto z = all_weights(zs);
  zo_update_int8(net, 3, 5, +1, 63, kDense, 1);
  const auto after = all_weights(net);
  for (size_t k = 0; k < before.size(); ++k) {
    const int d = after[k] - before[k];
    EXPECT_LE(std::abs(d), 1);
    if (d != 0) {
      EXPECT_EQ(d > 0, z[k] < 0) << k;
    }
  }
}

TEST(ZoUpdateInt8, ClampsAtMinus127) {
  uint32_t seed = 0;
  while (scalar_z(seed, 63) < 48) ++seed;
  QuantNetwork net({1}, {LayerSpec::fc(1, 1)}, -7);
  net.set_weights(0, std::vector<int8_t>{-127});
  zo_update_int8(net, 1, seed, +1, 63, kDense, 3);
  EXPECT_EQ(net.weight(0).data[0], -127);
}

TEST(TrainStepInt8, FullBpMatchesPlainBackward) {
  QuantNetwork a = small_net(), b = small_net();
  SeededGenerator gen(8);
  QuantTensor x({5, 6}, -7);
  fill_uniform_int8(gen, x.data, 127);
  std::vector<int> y{0, 1, 2, 3, 1};
  ZOInt8Config cfg;
  cfg.partition = 0;
  train_step_int8(a, x, y, cfg, 99);
  QuantActivationCache cache;
  q_forward(b, x, &cache, 0);
  q_backward_partial(b, cache, y, cfg.bits_bp);
  EXPECT_EQ(all_weights(a), all_weights(b));
}

TEST(TrainStepInt8, FullZoUsesNoBackwardBuffersOrFloats) {
  QuantNetwork net = small_net();
  SeededGenerator gen(8);
  QuantTensor x({5, 6}, -7);
  fill_uniform_int8(gen, x.data, 127);
  std::vector<int> y{0, 1, 2, 3, 1};
  ZOInt8Config cfg;
  cfg.partition = 3;
  reset_counters();
  PhaseTimes times;
  train_step_int8(net, x, y, cfg, 99, &times);
  EXPECT_EQ(counters().gradient_buffers, 0u);
  EXPECT_EQ(counters().float_ops, 0u);
  EXPECT_EQ(counters().forward_passes, 2u);
  EXPECT_EQ(times.bp_backward, 0);
}

TEST(TrainStepInt8, RejectsBadConfig) {
  QuantNetwork net = small_net();
  ZOInt8Config cfg;
  cfg.r_max = 0;
  EXPECT_THROW(cfg.validate(net), std::invalid_argument);
  cfg = {};
  cfg.partition = 4;
  EXPECT_THROW(cfg.validate(net), std::invalid_argument);
}

}  // namespace
}  // namespace ezo
