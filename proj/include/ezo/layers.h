// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Layer descriptions shared by the FP32 and INT8 networks.
//
// Layers are numbered 0..L-1 in code. A partition point C means layers
// 0..C-1 are trained with zeroth-order updates and C..L-1 with
// backpropagation. Activation index j runs over 0..L: a(0) is the network
// input and a(j) the output of layer j-1.

#ifndef EZO_LAYERS_H_
#define EZO_LAYERS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ezo/tensor.h"

namespace ezo {

enum class LayerKind : uint8_t {
  kConv2d = 1,
  kFC = 2,
  kReLU = 3,
  kMaxPool2d = 4,
  kFlatten = 5,
};

std::string to_string(LayerKind kind);

// Conv2d is stride 1 with symmetric zero padding; MaxPool2d uses stride equal
// to its window.
struct LayerSpec {
  LayerKind kind = LayerKind::kReLU;
  uint32_t in = 0;      // input channels or input features
  uint32_t out = 0;     // output channels or output features
  uint32_t kernel = 0;  // conv kernel size or pool window
  uint32_t pad = 0;

  static LayerSpec conv2d(uint32_t in_ch, uint32_t out_ch, uint32_t kernel = 5,
                          uint32_t pad = 2);
  static LayerSpec fc(uint32_t in_features, uint32_t out_features);
  static LayerSpec relu();
  static LayerSpec maxpool2d(uint32_t window = 2);
  static LayerSpec flatten();

  bool has_params() const {
    return kind == LayerKind::kConv2d || kind == LayerKind::kFC;
  }
  Shape weight_shape() const;
  size_t weight_count() const;
  size_t bias_count() const;  // output channels/features; 0 without params

  // Per-sample output shape; throws std::invalid_argument on a mismatch.
  Shape output_shape(const Shape& input) const;

  std::string describe() const;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Per-sample shapes a(0)..a(L). Throws when consecutive layers do not chain.
std::vector<Shape> infer_shapes(const Shape& input,
                                std::span<const LayerSpec> layers);

// Conv(1->6,5x5,pad 2)-ReLU-Pool-Conv(6->16,5x5,pad 2)-ReLU-Pool-Flatten-
// FC(784->120)-ReLU-FC(120->84)-ReLU-FC(84->10) on 1x28x28 inputs.
std::vector<LayerSpec> lenet5_layers();
Shape lenet5_input_shape();

// Index of the k-th trainable layer counted from the end (k = 1 is the last).
size_t trainable_from_end(std::span<const LayerSpec> layers, size_t k);

// Named partitions. ZO-Feat-Cls1 trains the features and the first classifier
// layer with ZO (the last two parameterized layers use BP); ZO-Feat-Cls2 also
// hands the second classifier layer to ZO (only the last one uses BP).
enum class TrainingMode { kFullBp, kZoFeatCls1, kZoFeatCls2, kFullZo };

std::string to_string(TrainingMode mode);
TrainingMode parse_training_mode(const std::string& name);
size_t partition_for(TrainingMode mode, std::span<const LayerSpec> layers);

}  // namespace ezo

#endif  // EZO_LAYERS_H_
