// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "ezo/loss.h"
#include "ezo/optim.h"
#include "ezo/prng.h"
#include "ezo/zo_fp32.h"
#include "ezo/zo_int8.h"

namespace ezo {

SeedPlan SeedPlan::from_master(uint32_t master) {
  SeededGenerator gen(master);
  SeedPlan p;
  p.init = gen.next_u32();
  p.shuffle = gen.next_u32();
  p.steps = gen.next_u32();
  p.data = gen.next_u32();
  return p;
}

uint32_t SeedPlan::shuffle_seed(int epoch) const {
  SeededGenerator gen(shuffle);
  gen.discard(static_cast<uint64_t>(epoch));
  return gen.next_u32();
}

QuantDataset quantize_dataset(const Dataset& ds) {
  return {quantize_input(ds.images), ds.labels};
}

size_t resolve_partition(const RunConfig& cfg,
                         const std::vector<LayerSpec>& layers) {
  if (cfg.partition) {
    if (*cfg.partition > layers.size()) {
      throw std::invalid_argument("partition exceeds the layer count");
    }
    return *cfg.partition;
  }
  return partition_for(parse_training_mode(cfg.mode), layers);
}

namespace {

QuantTensor gather_quant(const QuantTensor& images,
                         std::span<const size_t> idx) {
  const Shape& s = images.shape;
  const size_t per = shape_size(s) / s[0];
  Shape shape = s;
  shape[0] = idx.size();
  QuantTensor out(shape, images.exponent);
  for (size_t k = 0; k < idx.size(); ++k) {
    std::copy_n(images.data.data() + idx[k] * per, per,
                out.data.data() + k * per);
  }
  return out;
}

std::vector<size_t> range(size_t lo, size_t hi) {
  std::vector<size_t> v(hi - lo);
  for (size_t k = 0; k < v.size(); ++k) v[k] = lo + k;
  return v;
}

}  // namespace

EvalResult evaluate(const Network& net, const Dataset& ds, size_t eval_batch) {
  double loss = 0;
  size_t correct = 0;
  for (size_t lo = 0; lo < ds.size(); lo += eval_batch) {
    const size_t hi = std::min(ds.size(), lo + eval_batch);
    const auto idx = range(lo, hi);
    const Batch b = gather(ds, idx);
    const Tensor logits = forward(net, b.x);
    loss += cross_entropy(logits, b.y) * static_cast<double>(hi - lo);
    correct += count_correct(logits, b.y);
  }
  const double n = static_cast<double>(ds.size());
  return {loss / n, static_cast<double>(correct) / n};
}

EvalResult evaluate(const QuantNetwork& net, const QuantDataset& ds,
                    size_t eval_batch) {
  double loss = 0;
  size_t correct = 0;
  for (size_t lo = 0; lo < ds.size(); lo += eval_batch) {
    const size_t hi = std::min(ds.size(), lo + eval_batch);
    const auto idx = range(lo, hi);
    const QuantTensor x = gather_quant(ds.images, idx);
    const std::span<const int> y(ds.labels.data() + lo, hi - lo);
    const QuantTensor logits = q_forward(net, x);
    loss += cross_entropy(dequantize(logits), y) * static_cast<double>(hi - lo);
    correct += count_correct(logits, y);
  }
  const double n = static_cast<double>(ds.size());
  return {loss / n, static_cast<double>(correct) / n};
}

std::vector<EpochMetrics> train_fp32(Network& net, const Dataset& train,
                                     const Dataset& test, const RunConfig& cfg,
                                     const EpochCallback& on_epoch) {
  cfg.validate();
  const SeedPlan seeds = SeedPlan::from_master(cfg.seed);
  SeededGenerator step_seeds(seeds.steps);
  ZOConfig zo;
  zo.eps = cfg.eps;
  zo.partition = resolve_partition(cfg, net.layers());
  zo.g_clip = cfg.g_clip;
  zo.merge_perturb_update = cfg.merge;
  zo.bp_source = cfg.bp_source == "plus"    ? BpSource::kPlus
                 : cfg.bp_source == "third" ? BpSource::kThird
                                            : BpSource::kMinus;
  std::unique_ptr<Optimizer> opt;
  if (cfg.optimizer == "adam") {
    opt = std::make_unique<Adam>();
  } else {
    opt = std::make_unique<Sgd>();
  }

  std::vector<EpochMetrics> out;
  for (int e = 0; e < cfg.epochs; ++e) {
    EpochMetrics m;
    m.epoch = e;
    m.lr = scheduled_lr(cfg, e);
    zo.lr = m.lr;
    if (cfg.lr_bp) zo.lr_bp = *cfg.lr_bp * (m.lr / cfg.lr);
    double loss_sum = 0;
    size_t loss_count = 0;
    for (const auto& idx : batch_indices(train.size(), cfg.batch,
                                         seeds.shuffle_seed(e))) {
      const Batch b = gather(train, idx);
      const StepMetrics s =
          train_step(net, b.x, b.y, zo, step_seeds.next_u32(), *opt, &m.times);
      ++m.steps;
      if (s.skipped) {
        ++m.skipped_steps;
        continue;
      }
      const double l = std::isnan(s.bp_loss) ? s.loss_minus : s.bp_loss;
      loss_sum += l;
      ++loss_count;
    }
    m.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count)
                              : std::numeric_limits<double>::quiet_NaN();
    const EvalResult r = evaluate(net, test, cfg.eval_batch);
    m.test_loss = r.loss;
    m.test_accuracy = r.accuracy;
    if (on_epoch) on_epoch(m);
    out.push_back(m);
  }
  return out;
}

std::vector<EpochMetrics> train_int8(QuantNetwork& net,
                                     const QuantDataset& train,
                                     const QuantDataset& test,
                                     const RunConfig& cfg,
                                     const EpochCallback& on_epoch) {
  cfg.validate();
  const SeedPlan seeds = SeedPlan::from_master(cfg.seed);
  SeededGenerator step_seeds(seeds.steps);
  ZOInt8Config zo;
  zo.r_max = cfg.r_max;
  zo.bits_zo = cfg.b_zo;
  zo.partition = resolve_partition(cfg, net.layers());
  zo.sign_mode = cfg.sign_mode == "float_reference" ? SignMode::kFloatReference
                                                    : SignMode::kInteger;
  zo.ce_frac_bits = cfg.ce_frac_bits;

  std::vector<EpochMetrics> out;
  for (int e = 0; e < cfg.epochs; ++e) {
    EpochMetrics m;
    m.epoch = e;
    m.b_bp = schedule_at(cfg.b_bp, e);
    m.p_zero = schedule_at(cfg.p_zero, e);
    zo.bits_bp = m.b_bp;
    zo.p_zero = ZeroProbability::from_double(m.p_zero);
    const uint64_t float_ops_before = counters().float_ops;
    for (const auto& idx : batch_indices(train.size(), cfg.batch,
                                         seeds.shuffle_seed(e))) {
      const QuantTensor x = gather_quant(train.images, idx);
      std::vector<int> y(idx.size());
      for (size_t k = 0; k < idx.size(); ++k) y[k] = train.labels[idx[k]];
      const Int8StepMetrics s =
          train_step_int8(net, x, y, zo, step_seeds.next_u32(), &m.times);
      ++m.steps;
      if (zo.partition > 0 && s.g == 0) ++m.zero_sign_steps;
    }
    m.train_float_ops = counters().float_ops - float_ops_before;
    m.train_loss = std::numeric_limits<double>::quiet_NaN();
    const EvalResult r = evaluate(net, test, cfg.eval_batch);
    m.test_loss = r.loss;
    m.test_accuracy = r.accuracy;
    if (on_epoch) on_epoch(m);
    out.push_back(m);
  }
  return out;
}

}  // namespace ezo
