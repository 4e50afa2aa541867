// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/loss.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ezo {

namespace {

void check_batch(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("logits must be (B, K), got " +
                                shape_string(logits.shape()));
  }
  if (logits.dim(0) != labels.size()) {
    throw std::invalid_argument("label count does not match batch size");
  }
  const int k = static_cast<int>(logits.dim(1));
  for (int y : labels) {
    if (y < 0 || y >= k) {
      throw std::out_of_range("label " + std::to_string(y) +
                              " outside [0, " + std::to_string(k) + ")");
    }
  }
}

}  // namespace

double cross_entropy(const Tensor& logits, std::span<const int> labels) {
  check_batch(logits, labels);
  const size_t b = logits.dim(0), k = logits.dim(1);
  if (b == 0) return 0.0;
  double total = 0.0;
  for (size_t n = 0; n < b; ++n) {
    const float* row = logits.data() + n * k;
    double mx = row[0];
    for (size_t j = 1; j < k; ++j) mx = std::max<double>(mx, row[j]);
    double sum = 0.0;
    for (size_t j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
    total += std::log(sum) + mx - row[labels[n]];
  }
  return total / static_cast<double>(b);
}

Tensor cross_entropy_grad(const Tensor& logits, std::span<const int> labels) {
  check_batch(logits, labels);
  const size_t b = logits.dim(0), k = logits.dim(1);
  Tensor grad(logits.shape());
  const double inv_b = 1.0 / static_cast<double>(b);
  for (size_t n = 0; n < b; ++n) {
    const float* row = logits.data() + n * k;
    float* g = grad.data() + n * k;
    double mx = row[0];
    for (size_t j = 1; j < k; ++j) mx = std::max<double>(mx, row[j]);
    double sum = 0.0;
    for (size_t j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
    for (size_t j = 0; j < k; ++j) {
      double p = std::exp(row[j] - mx) / sum;
      if (static_cast<int>(j) == labels[n]) p -= 1.0;
      g[j] = static_cast<float>(p * inv_b);
    }
  }
  return grad;
}

size_t count_correct(const Tensor& logits, std::span<const int> labels) {
  check_batch(logits, labels);
  const size_t b = logits.dim(0), k = logits.dim(1);
  size_t correct = 0;
  for (size_t n = 0; n < b; ++n) {
    const float* row = logits.data() + n * k;
    size_t best = 0;
    for (size_t j = 1; j < k; ++j) {
      if (row[j] > row[best]) best = j;
    }
    if (static_cast<int>(best) == labels[n]) ++correct;
  }
  return correct;
}

}  // namespace ezo
