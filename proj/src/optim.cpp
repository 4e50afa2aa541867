// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/optim.h"

#include <cmath>
#include <stdexcept>

namespace ezo {

namespace {

void check_match(const Tensor& param, const Tensor& grad) {
  if (param.shape() != grad.shape()) {
    throw std::invalid_argument("gradient shape " + shape_string(grad.shape()) +
                                " does not match parameter " +
                                shape_string(param.shape()));
  }
}

void adam_update(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, float lr,
                 float b1, float b2, float eps, float c1, float c2) {
  if (m.empty()) {
    m = Tensor(p.shape());
    v = Tensor(p.shape());
  }
  for (size_t k = 0; k < p.size(); ++k) {
    m[k] = b1 * m[k] + (1.0f - b1) * g[k];
    v[k] = b2 * v[k] + (1.0f - b2) * g[k] * g[k];
    const float mhat = m[k] / c1;
    const float vhat = v[k] / c2;
    p[k] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

void Sgd::step(Network& net, const GradientSet& grads, float lr) {
  for (const ParamGrad& g : grads) {
    LayerParams& p = net.params(g.layer);
    check_match(p.weight, g.weight);
    for (size_t k = 0; k < p.weight.size(); ++k) p.weight[k] -= lr * g.weight[k];
    if (!g.bias.empty()) {
      check_match(p.bias, g.bias);
      for (size_t k = 0; k < p.bias.size(); ++k) p.bias[k] -= lr * g.bias[k];
    }
  }
}

void Adam::step(Network& net, const GradientSet& grads, float lr) {
  ++t_;
  const float c1 = 1.0f - std::pow(beta1_, static_cast<float>(t_));
  const float c2 = 1.0f - std::pow(beta2_, static_cast<float>(t_));
  for (const ParamGrad& g : grads) {
    LayerParams& p = net.params(g.layer);
    check_match(p.weight, g.weight);
    Moments& st = moments_[g.layer];
    adam_update(p.weight, g.weight, st.m_w, st.v_w, lr, beta1_, beta2_, eps_,
                c1, c2);
    if (!g.bias.empty()) {
      check_match(p.bias, g.bias);
      adam_update(p.bias, g.bias, st.m_b, st.v_b, lr, beta1_, beta2_, eps_, c1,
                  c2);
    }
  }
}

size_t Adam::state_bytes() const {
  size_t n = 0;
  for (const auto& [layer, st] : moments_) {
    n += st.m_w.bytes() + st.v_w.bytes() + st.m_b.bytes() + st.v_b.bytes();
  }
  return n;
}

}  // namespace ezo
