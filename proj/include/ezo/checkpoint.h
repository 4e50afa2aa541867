// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Binary model checkpoints. Layout (all integers little-endian):
//
//   "EZO1"  u8 precision (0 fp32, 1 int8)  u8 has_bias
//   u32 input rank, u32 dims...
//   u32 layer count, per layer: u8 kind, u32 in, out, kernel, pad
//   per parameterized layer:
//     fp32: weights then biases as IEEE-754 binary32
//     int8: i16 exponent, then the int8 weights

#ifndef EZO_CHECKPOINT_H_
#define EZO_CHECKPOINT_H_

#include <optional>
#include <string>

#include "ezo/config.h"
#include "ezo/network.h"
#include "ezo/qnet.h"

namespace ezo {

void save_checkpoint(const std::string& path, const Network& net);
void save_checkpoint(const std::string& path, const QuantNetwork& net);

// Exactly one of fp32 / int8 is set, matching `precision`.
struct Checkpoint {
  Precision precision = Precision::kFp32;
  std::optional<Network> fp32;
  std::optional<QuantNetwork> int8;
};

// Throws std::runtime_error on I/O errors, a bad magic, truncation or
// trailing bytes.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ezo

#endif  // EZO_CHECKPOINT_H_
