// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Epoch loops shared by the CLI and the acceptance suite.

#ifndef EZO_TRAINER_H_
#define EZO_TRAINER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "ezo/config.h"
#include "ezo/data.h"
#include "ezo/instrumentation.h"
#include "ezo/network.h"
#include "ezo/qnet.h"

namespace ezo {

// Every stream of a run derives from the master seed: the first three words
// of a generator seeded with it become the init, shuffle and step seeds, and
// the fourth seeds data subsampling (rotated fine-tuning subsets).
// Epoch e shuffles with the (e+1)-th word of the shuffle stream; step seeds
// are consecutive words of the step stream.
struct SeedPlan {
  uint32_t init = 0;
  uint32_t shuffle = 0;
  uint32_t steps = 0;
  uint32_t data = 0;

  static SeedPlan from_master(uint32_t master);
  uint32_t shuffle_seed(int epoch) const;
};

struct EvalResult {
  double loss = 0;
  double accuracy = 0;
};

struct EpochMetrics {
  int epoch = 0;
  float lr = 0;
  int b_bp = 0;
  double p_zero = 0;
  // Mean loss over the epoch's steps at the backprop point (FP32); NaN for
  // INT8, whose training steps never compute a float loss.
  double train_loss = 0;
  double test_loss = 0;
  double test_accuracy = 0;
  size_t steps = 0;
  size_t skipped_steps = 0;
  size_t zero_sign_steps = 0;  // ZO steps whose ternary gradient was 0
  // Float operations counted during the epoch's training steps only.
  uint64_t train_float_ops = 0;
  PhaseTimes times;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

struct QuantDataset {
  QuantTensor images;  // (N, 1, H, W), exponent -7
  std::vector<int> labels;
  size_t size() const { return labels.size(); }
};

QuantDataset quantize_dataset(const Dataset& ds);

size_t resolve_partition(const RunConfig& cfg,
                         const std::vector<LayerSpec>& layers);

EvalResult evaluate(const Network& net, const Dataset& ds, size_t eval_batch);
// Accuracy from the integer argmax; loss from the dequantized logits.
EvalResult evaluate(const QuantNetwork& net, const QuantDataset& ds,
                    size_t eval_batch);

// Runs cfg.epochs epochs (numbered 0..epochs-1), evaluating on `test` after
// each.
std::vector<EpochMetrics> train_fp32(Network& net, const Dataset& train,
                                     const Dataset& test, const RunConfig& cfg,
                                     const EpochCallback& on_epoch = {});
std::vector<EpochMetrics> train_int8(QuantNetwork& net,
                                     const QuantDataset& train,
                                     const QuantDataset& test,
                                     const RunConfig& cfg,
                                     const EpochCallback& on_epoch = {});

}  // namespace ezo

#endif  // EZO_TRAINER_H_
