// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: a flat key=value file plus command-line overrides.

#ifndef EZO_CONFIG_H_
#define EZO_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ezo {

enum class Precision { kFp32, kInt8 };

// Piecewise-constant value by epoch: entry (e, v) applies from epoch e on.
template <typename T>
using Schedule = std::vector<std::pair<int, T>>;

struct RunConfig {
  Precision precision = Precision::kFp32;
  std::string mode = "full_bp";
  // Explicit partition point; overrides `mode` when set.
  std::optional<size_t> partition;
  int epochs = 20;
  size_t batch = 32;
  uint32_t seed = 1;
  // 0 keeps the whole split.
  size_t train_subset = 0;
  size_t test_subset = 0;
  size_t eval_batch = 1000;

  // FP32
  float lr = 1e-2f;
  std::optional<float> lr_bp;
  float lr_decay = 0.8f;
  int lr_decay_every = 10;
  float eps = 1e-3f;
  std::optional<float> g_clip = 10.0f;
  std::string optimizer = "sgd";
  std::string bp_source = "minus";
  bool merge = true;

  // INT8
  int r_max = 15;
  int b_zo = 1;
  Schedule<int> b_bp = {{0, 5}, {20, 4}, {50, 3}};
  Schedule<double> p_zero = {{0, 0.33}, {20, 0.5}, {50, 0.9}};
  std::string sign_mode = "integer";
  int param_exponent = -7;
  int r_init = 64;
  int ce_frac_bits = 4;

  // Fine-tuning
  std::string checkpoint;
  double angle = 45.0;
  size_t finetune_train = 1024;
  size_t finetune_test = 1024;

  std::string data_dir = "data/mnist";
  std::string out_dir = "out";

  // Throws std::invalid_argument listing every invalid field.
  void validate() const;
};

// Applies one key=value assignment; throws for unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key,
                   const std::string& value);
void apply_assignment(RunConfig& cfg, const std::string& assignment);
// Reads a file of key=value lines ('#' starts a comment).
void apply_config_file(RunConfig& cfg, const std::string& path);

// The effective configuration as sorted key=value lines.
std::string dump_config(const RunConfig& cfg);

template <typename T>
T schedule_at(const Schedule<T>& s, int epoch) {
  T v = s.front().second;
  for (const auto& [e, x] : s) {
    if (e <= epoch) v = x;
  }
  return v;
}

// lr * decay^floor(epoch / every)
float scheduled_lr(const RunConfig& cfg, int epoch);

std::string to_string(Precision p);

}  // namespace ezo

#endif  // EZO_CONFIG_H_
