// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EZO_OPTIM_H_
#define EZO_OPTIM_H_

#include <map>

#include "ezo/network.h"

namespace ezo {

// Applies backprop gradients to the layers they name.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(Network& net, const GradientSet& grads, float lr) = 0;
  // Bytes of persistent optimizer state currently held.
  virtual size_t state_bytes() const { return 0; }
};

class Sgd final : public Optimizer {
 public:
  void step(Network& net, const GradientSet& grads, float lr) override;
};

// Adam with bias correction. Moment buffers are created lazily for each layer
// the first time it receives a gradient.
class Adam final : public Optimizer {
 public:
  explicit Adam(float beta1 = 0.9f, float beta2 = 0.999f, float eps = 1e-8f)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Network& net, const GradientSet& grads, float lr) override;
  size_t state_bytes() const override;
  long steps() const { return t_; }

 private:
  struct Moments {
    Tensor m_w, v_w, m_b, v_b;
  };
  float beta1_, beta2_, eps_;
  long t_ = 0;
  std::map<size_t, Moments> moments_;
};

}  // namespace ezo

#endif  // EZO_OPTIM_H_
