// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form training memory for a static-allocation schedule (no buffer
// reuse across layers). Every layer output is an activation buffer except
// Flatten, which aliases its input. Errors mirror the activations of the
// backpropagated layers; gradients exist only for BP-trained parameters.

#ifndef EZO_MEMMODEL_H_
#define EZO_MEMMODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ezo/config.h"
#include "ezo/layers.h"
#include "ezo/tensor.h"

namespace ezo {

struct ShapeSpec {
  struct Layer {
    LayerKind kind = LayerKind::kReLU;
    uint64_t params = 0;      // weights + biases
    uint64_t biases = 0;      // the bias share of `params`
    uint64_t activation = 0;  // output elements per sample (0 for Flatten)
    uint64_t input = 0;       // input elements per sample
    bool trainable = false;
  };
  std::vector<Layer> layers;

  size_t num_layers() const { return layers.size(); }
  uint64_t total_params() const;
};

ShapeSpec make_shape_spec(const Shape& input, std::span<const LayerSpec> layers,
                          bool with_bias);
// The same layers with biases dropped (INT8 models carry none).
ShapeSpec without_biases(ShapeSpec spec);

// Text format, one item per line ('#' comments):
//   input C H W | input N
//   bias 0|1            (default 1)
//   conv IN OUT K PAD | fc IN OUT | relu | pool K | flatten
ShapeSpec parse_shape_spec(const std::string& text);
ShapeSpec load_shape_spec(const std::string& path);

enum class OptimizerKind { kSgd, kAdam };

struct MemoryReport {
  std::string mode;  // full_bp, full_zo or elastic(C)
  Precision precision = Precision::kFp32;
  size_t partition = 0;
  uint64_t params = 0;
  uint64_t activations = 0;
  uint64_t grads = 0;
  uint64_t errors = 0;
  uint64_t int32_scratch = 0;
  uint64_t optimizer_state = 0;
  uint64_t total = 0;
};

// `partition` = C: layers below C are ZO-trained, layers C.. use BP. C = 0 is
// Full BP and C = L is Full ZO. Adam keeps two moments per BP-trained
// parameter. Throws std::invalid_argument for C > L or B = 0.
MemoryReport mem_fp32(const ShapeSpec& spec, size_t batch, size_t partition,
                      OptimizerKind opt = OptimizerKind::kSgd);

// Int8 buffers at one byte per element plus int32 scratch: the pre-requantize
// output of every parameterized layer, and for the BP part each layer's
// gradient accumulator and (above the lowest BP layer) its input-error
// accumulator.
MemoryReport mem_int8(const ShapeSpec& spec, size_t batch, size_t partition);

// Reports for C = 0..L.
std::vector<MemoryReport> partition_sweep(const ShapeSpec& spec, size_t batch,
                                          Precision precision,
                                          OptimizerKind opt = OptimizerKind::kSgd);

std::string memory_csv(std::span<const MemoryReport> reports);
std::string memory_table(std::span<const MemoryReport> reports);

}  // namespace ezo

#endif  // EZO_MEMMODEL_H_
