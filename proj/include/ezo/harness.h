// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Whole runs behind the CLI subcommands: data preparation, training,
// evaluation, fine-tuning, the sign-estimator benchmark and memory reports.
// Every function is a pure function of its configuration and the data files,
// apart from wall-clock timings, which go to a separate file.

#ifndef EZO_HARNESS_H_
#define EZO_HARNESS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ezo/config.h"
#include "ezo/data.h"
#include "ezo/memmodel.h"
#include "ezo/trainer.h"

namespace ezo {

// Deterministic columns only; wall time lives in timing.csv.
std::string metrics_csv_header();
std::string metrics_csv_row(const EpochMetrics& m);
std::string timing_csv_header();
std::string timing_csv_row(const EpochMetrics& m);

struct RunData {
  Dataset train;
  Dataset test;
};

// MNIST from cfg.data_dir, cut to the first train_subset / test_subset
// images when those are non-zero.
RunData load_run_data(const RunConfig& cfg);

struct RunResult {
  std::vector<EpochMetrics> epochs;
  std::string metrics_csv;  // exactly what was written to metrics.csv
};

// Trains a freshly initialized LeNet-5 at cfg.precision. When `out_dir` is
// non-empty, writes metrics.csv, timing.csv, config.txt and final.ckpt there
// (creating the directory). `log` receives one line per epoch if non-null.
RunResult run_train(const RunConfig& cfg, const RunData& data,
                    const std::string& out_dir, std::ostream* log = nullptr);

// Evaluates a checkpoint of either precision.
EvalResult run_eval(const std::string& checkpoint, const Dataset& test,
                    size_t eval_batch);

// Loads cfg.checkpoint, draws rotated train/test subsets of
// cfg.finetune_train / cfg.finetune_test images at cfg.angle from the data
// seed, records the untouched model as epoch -1 and then fine-tunes for
// cfg.epochs epochs. Outputs as for run_train.
RunResult run_finetune(const RunConfig& cfg, const RunData& data,
                       const std::string& out_dir,
                       std::ostream* log = nullptr);

struct SignTestResult {
  size_t trials = 0;
  size_t excluded = 0;  // float loss difference exactly zero
  size_t agreements = 0;
  // agreements / (trials - excluded); 1.0 when nothing was comparable.
  double rate = 1.0;
  bool zero_denominator = false;
};

// Random int8 logit pairs (B, K): values uniform in [-127, 127], base
// exponent uniform in [-7, -3], the second tensor's exponent offset by up to
// +-4. `identical` makes both tensors the same.
SignTestResult run_signtest(size_t trials, size_t batch, size_t classes,
                            uint32_t seed, bool identical = false);
std::string signtest_csv(size_t batch, size_t classes,
                         const SignTestResult& r);

// FP32 (with biases, SGD and Adam) and INT8 (bias-free) partition sweeps.
std::vector<MemoryReport> run_memreport(const ShapeSpec& spec_with_bias,
                                        size_t batch);

}  // namespace ezo

#endif  // EZO_HARNESS_H_
