// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/zo_fp32.h"

#include <cmath>
#include <gtest/gtest.h>

#include "ezo/loss.h"

namespace ezo {
namespace {

Network small_net(uint32_t seed) {
  Network net({1, 6, 6},
              {LayerSpec::conv2d(1, 2, 3, 1), LayerSpec::relu(),
               LayerSpec::maxpool2d(2), LayerSpec::flatten(),
               LayerSpec::fc(18, 6), LayerSpec::relu(), LayerSpec::fc(6, 3)});
  SeededGenerator gen(seed);
  init_parameters(net, gen);
  return net;
}

Tensor batch_input(uint32_t seed, size_t b) {
  SeededGenerator gen(seed);
  Tensor x({b, 1, 6, 6});
  fill_uniform_real(gen, x.values(), 0.0f, 1.0f);
  return x;
}

std::vector<float> flat_params(const Network& net) {
  std::vector<float> out;
  for (size_t i = 0; i < net.num_layers(); ++i) {
    const auto& p = net.params(i);
    out.insert(out.end(), p.weight.values().begin(), p.weight.values().end());
    out.insert(out.end(), p.bias.values().begin(), p.bias.values().end());
  }
  return out;
}

TEST(ZoGradient, Examples) {
  EXPECT_EQ(zo_gradient(0.7, 0.7, 1e-3f, 10.0f), 0.0f);
  EXPECT_FLOAT_EQ(zo_gradient(1.0, 0.5, 0.25f, std::nullopt), 1.0f);
  EXPECT_FLOAT_EQ(zo_gradient(10.0, 0.0, 0.01f, 5.0f), 5.0f);
  EXPECT_FLOAT_EQ(zo_gradient(0.0, 10.0, 0.01f, 5.0f), -5.0f);
  EXPECT_THROW(zo_gradient(NAN, 0.0, 0.1f, 10.0f), std::domain_error);
  EXPECT_THROW(zo_gradient(INFINITY, 0.0, 0.1f, 10.0f), std::domain_error);
}

TEST(PerturbParameters, ZeroEpsAndZeroPartitionAreNoOps) {
  Network net = small_net(1);
  const auto before = flat_params(net);
  perturb_parameters(net, 7, 99, 1.0f, 0.0f);
  EXPECT_EQ(flat_params(net), before);
  perturb_parameters(net, 0, 99, 1.0f, 0.5f);
  EXPECT_EQ(flat_params(net), before);
}

TEST(PerturbParameters, CycleRestores) {
  Network net = small_net(2);
  const auto before = flat_params(net);
  perturb_parameters(net, 7, 1234, +1.0f, 1e-3f);
  perturb_parameters(net, 7, 1234, -2.0f, 1e-3f);
  perturb_parameters(net, 7, 1234, +1.0f, 1e-3f);
  const auto after = flat_params(net);
  for (size_t k = 0; k < before.size(); ++k) {
    EXPECT_LE(std::abs(after[k] - before[k]), 1e-5f * std::abs(before[k]) + 1e-9f);
  }
}

TEST(PerturbParameters, OnlyLayersBelowPartition) {
  Network net = small_net(3);
  const Network ref = net;
  perturb_parameters(net, 4, 5, 1.0f, 0.1f);
  EXPECT_NE(net.params(0).weight[0], ref.params(0).weight[0]);
  for (size_t k = 0; k < net.params(4).weight.size(); ++k) {
    EXPECT_EQ(net.params(4).weight[k], ref.params(4).weight[k]);
  }
}

TEST(ZoUpdate, MergedMatchesUnmerged) {
  Network a = small_net(4), b = small_net(4);
  const uint32_t seed = 77;
  const float eps = 1e-3f, lr = 0.05f, g = 1.7f;
  perturb_parameters(a, 7, seed, +1.0f, eps);
  perturb_parameters(a, 7, seed, -2.0f, eps);
  zo_update(a, 7, seed, lr, g, eps, true);
  zo_update(b, 7, seed, lr, g, eps, false);
  const auto pa = flat_params(a), pb = flat_params(b);
  for (size_t k = 0; k < pa.size(); ++k) {
    EXPECT_NEAR(pa[k], pb[k], 1e-5f * std::abs(pb[k]) + 1e-7f);
  }
}

TEST(ZoUpdate, SingleParameterMovesByLrGz) {
  Network net({1}, {LayerSpec::fc(1, 1)}, /*with_bias=*/false);
  net.params(0).weight[0] = 0.25f;
  SeededGenerator gen(31);
  const float z0 = gaussian_vector(gen, 1)[0];
  zo_update(net, 1, 31, 0.1f, 2.0f, 1e-3f, false);
  EXPECT_FLOAT_EQ(net.params(0).weight[0], 0.25f - 0.2f * z0);
  zo_update(net, 1, 31, 0.1f, 0.0f, 1e-3f, false);
  EXPECT_FLOAT_EQ(net.params(0).weight[0], 0.25f - 0.2f * z0);
}

TEST(TrainStep, ZeroPartitionIsPlainBackprop) {
  Network a = small_net(5), b = small_net(5);
  const Tensor x = batch_input(6, 4);
  const std::vector<int> y{0, 2, 1, 1};
  ZOConfig cfg;
  cfg.partition = 0;
  cfg.lr = 0.1f;
  Sgd sgd;
  reset_counters();
  train_step(a, x, y, cfg, 42, sgd);
  EXPECT_EQ(counters().forward_passes, 2u);

  ActivationCache cache;
  forward(b, x, cache, 0);
  sgd.step(b, backward_partial(b, cache, y), 0.1f);
  EXPECT_EQ(flat_params(a), flat_params(b));
}

TEST(TrainStep, FullZoCreatesNoGradientBuffers) {
  Network net = small_net(7);
  const Tensor x = batch_input(8, 3);
  const std::vector<int> y{0, 1, 2};
  ZOConfig cfg;
  cfg.partition = net.num_layers();
  Sgd sgd;
  reset_counters();
  const StepMetrics m = train_step(net, x, y, cfg, 9, sgd);
  EXPECT_EQ(counters().forward_passes, 2u);
  EXPECT_EQ(counters().gradient_buffers, 0u);
  EXPECT_EQ(counters().peak_aux_bytes, 0u);
  EXPECT_TRUE(std::isnan(m.bp_loss));
}

TEST(TrainStep, FullZoEndsAtThetaMinusLrGz) {
  Network net = small_net(10), ref = small_net(10);
  const Tensor x = batch_input(11, 3);
  const std::vector<int> y{2, 1, 0};
  ZOConfig cfg;
  cfg.partition = net.num_layers();
  cfg.lr = 0.01f;
  Sgd sgd;
  const StepMetrics m = train_step(net, x, y, cfg, 12, sgd);
  zo_update(ref, cfg.partition, 12, cfg.lr, m.g, cfg.eps, false);
  const auto p = flat_params(net), q = flat_params(ref);
  for (size_t k = 0; k < p.size(); ++k) {
    EXPECT_NEAR(p[k], q[k], 1e-5f * std::abs(q[k]) + 1e-7f);
  }
}

TEST(TrainStep, PeakAuxiliaryMemoryShrinksWithPartition) {
  const Tensor x = batch_input(13, 4);
  const std::vector<int> y{0, 1, 2, 0};
  uint64_t prev = 0;
  for (size_t c = 7 + 1; c-- > 0;) {
    Network net = small_net(14);
    ZOConfig cfg;
    cfg.partition = c;
    Sgd sgd;
    reset_counters();
    train_step(net, x, y, cfg, 15, sgd);
    EXPECT_GE(counters().peak_aux_bytes, prev) << "partition " << c;
    prev = counters().peak_aux_bytes;
  }
}

TEST(TrainStep, ThirdForwardVariantUsesRestoredPoint) {
  Network net = small_net(16);
  const Tensor x = batch_input(17, 4);
  const std::vector<int> y{1, 1, 0, 2};
  ZOConfig cfg;
  cfg.partition = 4;
  cfg.bp_source = BpSource::kThird;
  const double clean = cross_entropy(forward(net, x), y);
  Sgd sgd;
  reset_counters();
  const StepMetrics m = train_step(net, x, y, cfg, 18, sgd);
  EXPECT_EQ(counters().forward_passes, 3u);
  EXPECT_NEAR(m.bp_loss, clean, 1e-5);
}

TEST(TrainStep, NonFiniteLossSkipsAndRestores) {
  Network net = small_net(19);
  const auto before = flat_params(net);
  Tensor x = batch_input(20, 2);
  x[0] = NAN;
  const std::vector<int> y{0, 1};
  ZOConfig cfg;
  cfg.partition = 4;
  Sgd sgd;
  const StepMetrics m = train_step(net, x, y, cfg, 21, sgd);
  EXPECT_TRUE(m.skipped);
  const auto after = flat_params(net);
  for (size_t k = 0; k < before.size(); ++k) {
    EXPECT_NEAR(after[k], before[k], 1e-6f);
  }
}

TEST(Spsa, QuadraticEstimateIsUnbiased) {
  // L(theta) = 0.5 |theta - theta*|^2 over a 50-weight layer.
  Network net({5}, {LayerSpec::fc(5, 10)}, /*with_bias=*/false);
  SeededGenerator init(22);
  fill_uniform_real(init, net.params(0).weight.values(), -1.0f, 1.0f);
  std::vector<float> target(50);
  fill_uniform_real(init, target, -1.0f, 1.0f);
  auto loss = [&] {
    double s = 0;
    for (size_t k = 0; k < 50; ++k) {
      const double d = net.params(0).weight[k] - target[k];
      s += 0.5 * d * d;
    }
    return s;
  };
  const float eps = 1e-3f;
  std::vector<double> mean(50, 0.0);
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const uint32_t seed = 1000 + t;
    perturb_parameters(net, 1, seed, +1.0f, eps);
    const double lp = loss();
    perturb_parameters(net, 1, seed, -2.0f, eps);
    const double lm = loss();
    perturb_parameters(net, 1, seed, +1.0f, eps);
    const float g = zo_gradient(lp, lm, eps, std::nullopt);
    SeededGenerator gen(seed);
    const auto z = gaussian_vector(gen, 50);
    for (size_t k = 0; k < 50; ++k) mean[k] += g * z[k] / draws;
  }
  double dot = 0, na = 0, nb = 0;
  for (size_t k = 0; k < 50; ++k) {
    const double truth = net.params(0).weight[k] - target[k];
    dot += mean[k] * truth;
    na += mean[k] * mean[k];
    nb += truth * truth;
  }
  EXPECT_GT(dot / std::sqrt(na * nb), 0.9);
}

}  // namespace
}  // namespace ezo
