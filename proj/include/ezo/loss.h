// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EZO_LOSS_H_
#define EZO_LOSS_H_

#include <span>

#include "ezo/tensor.h"

namespace ezo {

// Mean softmax cross-entropy of (B, K) logits. Accumulates in double with a
// max-shifted log-sum-exp; returns NaN/Inf if the logits are not finite.
double cross_entropy(const Tensor& logits, std::span<const int> labels);

// d(mean CE)/d(logits) = (softmax - onehot) / B.
Tensor cross_entropy_grad(const Tensor& logits, std::span<const int> labels);

// Number of rows whose argmax (first on ties) equals the label.
size_t count_correct(const Tensor& logits, std::span<const int> labels);

}  // namespace ezo

#endif  // EZO_LOSS_H_
