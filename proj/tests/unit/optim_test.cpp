// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/optim.h"

#include <cmath>
#include <gtest/gtest.h>

namespace ezo {
namespace {

Network two_param_net() {
  Network net({1}, {LayerSpec::fc(1, 2)}, /*with_bias=*/false);
  net.params(0).weight[0] = 1.0f;
  net.params(0).weight[1] = 2.0f;
  return net;
}

GradientSet grad_of(float a, float b) {
  ParamGrad g;
  g.layer = 0;
  g.weight = Tensor({2, 1}, {a, b});
  return {g};
}

TEST(Sgd, Examples) {
  Network net = two_param_net();
  Sgd sgd;
  sgd.step(net, grad_of(1.0f, -1.0f), 0.0f);
  EXPECT_EQ(net.params(0).weight[0], 1.0f);
  sgd.step(net, grad_of(1.0f, -1.0f), 0.5f);
  EXPECT_EQ(net.params(0).weight[0], 0.5f);
  EXPECT_EQ(net.params(0).weight[1], 2.5f);
  EXPECT_EQ(sgd.state_bytes(), 0u);
}

TEST(Sgd, RejectsShapeMismatch) {
  Network net = two_param_net();
  ParamGrad g;
  g.layer = 0;
  g.weight = Tensor({3});
  Sgd sgd;
  EXPECT_THROW(sgd.step(net, {g}, 0.1f), std::invalid_argument);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Network net = two_param_net();
  Adam adam;
  adam.step(net, grad_of(0.0f, 0.0f), 0.1f);
  EXPECT_EQ(net.params(0).weight[0], 1.0f);
  EXPECT_EQ(net.params(0).weight[1], 2.0f);
}

TEST(Adam, ConstantGradientStepTendsToLr) {
  Network net = two_param_net();
  Adam adam;
  const float lr = 1e-3f;
  float prev = net.params(0).weight[0];
  float step = 0;
  for (int t = 0; t < 1000; ++t) {
    adam.step(net, grad_of(0.3f, -2.0f), lr);
    step = prev - net.params(0).weight[0];
    prev = net.params(0).weight[0];
  }
  EXPECT_NEAR(step, lr, 0.01f * lr);
}

TEST(Adam, StateIsTwiceParameterBytes) {
  Network net = make_lenet5();
  Adam adam;
  GradientSet grads;
  for (size_t i : net.trainable_layers()) {
    ParamGrad g;
    g.layer = i;
    g.weight = Tensor(net.params(i).weight.shape());
    g.bias = Tensor(net.params(i).bias.shape());
    grads.push_back(std::move(g));
  }
  adam.step(net, grads, 1e-3f);
  EXPECT_EQ(adam.state_bytes(), 2 * net.num_parameters() * sizeof(float));
}

}  // namespace
}  // namespace ezo
