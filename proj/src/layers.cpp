// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/layers.h"

#include <stdexcept>

namespace ezo {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kFC: return "fc";
    case LayerKind::kReLU: return "relu";
    case LayerKind::kMaxPool2d: return "maxpool2d";
    case LayerKind::kFlatten: return "flatten";
  }
  return "unknown";
}

LayerSpec LayerSpec::conv2d(uint32_t in_ch, uint32_t out_ch, uint32_t kernel,
                            uint32_t pad) {
  if (in_ch == 0 || out_ch == 0 || kernel == 0) {
    throw std::invalid_argument("conv2d dimensions must be positive");
  }
  return {LayerKind::kConv2d, in_ch, out_ch, kernel, pad};
}

LayerSpec LayerSpec::fc(uint32_t in_features, uint32_t out_features) {
  if (in_features == 0 || out_features == 0) {
    throw std::invalid_argument("fc dimensions must be positive");
  }
  return {LayerKind::kFC, in_features, out_features, 0, 0};
}

LayerSpec LayerSpec::relu() { return {LayerKind::kReLU, 0, 0, 0, 0}; }

LayerSpec LayerSpec::maxpool2d(uint32_t window) {
  if (window == 0) throw std::invalid_argument("pool window must be positive");
  return {LayerKind::kMaxPool2d, 0, 0, window, 0};
}

LayerSpec LayerSpec::flatten() { return {LayerKind::kFlatten, 0, 0, 0, 0}; }

Shape LayerSpec::weight_shape() const {
  switch (kind) {
    case LayerKind::kConv2d: return {out, in, kernel, kernel};
    case LayerKind::kFC: return {out, in};
    default: return {};
  }
}

size_t LayerSpec::weight_count() const {
  return has_params() ? shape_size(weight_shape()) : 0;
}

size_t LayerSpec::bias_count() const { return has_params() ? out : 0; }

Shape LayerSpec::output_shape(const Shape& input) const {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(describe() + " cannot take input " +
                                shape_string(input) + ": " + why);
  };
  switch (kind) {
    case LayerKind::kConv2d: {
      if (input.size() != 3) fail("expected (C,H,W)");
      if (input[0] != in) fail("channel mismatch");
      const size_t span_h = input[1] + 2 * pad;
      const size_t span_w = input[2] + 2 * pad;
      if (span_h < kernel || span_w < kernel) fail("kernel larger than input");
      return {out, span_h - kernel + 1, span_w - kernel + 1};
    }
    case LayerKind::kFC:
      if (input.size() != 1) fail("expected a flat feature vector");
      if (input[0] != in) fail("feature count mismatch");
      return {out};
    case LayerKind::kReLU:
      return input;
    case LayerKind::kMaxPool2d:
      if (input.size() != 3) fail("expected (C,H,W)");
      if (input[1] < kernel || input[2] < kernel) fail("window too large");
      return {input[0], input[1] / kernel, input[2] / kernel};
    case LayerKind::kFlatten:
      return {shape_size(input)};
  }
  fail("unknown layer kind");
  return {};
}

std::string LayerSpec::describe() const {
  switch (kind) {
    case LayerKind::kConv2d:
      return "conv2d(" + std::to_string(in) + "->" + std::to_string(out) +
             ", k=" + std::to_string(kernel) + ", pad=" + std::to_string(pad) +
             ")";
    case LayerKind::kFC:
      return "fc(" + std::to_string(in) + "->" + std::to_string(out) + ")";
    case LayerKind::kMaxPool2d:
      return "maxpool2d(" + std::to_string(kernel) + ")";
    default:
      return to_string(kind);
  }
}

std::vector<Shape> infer_shapes(const Shape& input,
                                std::span<const LayerSpec> layers) {
  std::vector<Shape> shapes{input};
  shapes.reserve(layers.size() + 1);
  for (const auto& layer : layers) {
    shapes.push_back(layer.output_shape(shapes.back()));
  }
  return shapes;
}

std::vector<LayerSpec> lenet5_layers() {
  return {
      LayerSpec::conv2d(1, 6),   LayerSpec::relu(), LayerSpec::maxpool2d(2),
      LayerSpec::conv2d(6, 16),  LayerSpec::relu(), LayerSpec::maxpool2d(2),
      LayerSpec::flatten(),      LayerSpec::fc(784, 120), LayerSpec::relu(),
      LayerSpec::fc(120, 84),    LayerSpec::relu(), LayerSpec::fc(84, 10),
  };
}

Shape lenet5_input_shape() { return {1, 28, 28}; }

size_t trainable_from_end(std::span<const LayerSpec> layers, size_t k) {
  size_t seen = 0;
  for (size_t i = layers.size(); i-- > 0;) {
    if (layers[i].has_params() && ++seen == k) return i;
  }
  throw std::invalid_argument("network has fewer than " + std::to_string(k) +
                              " trainable layers");
}

std::string to_string(TrainingMode mode) {
  switch (mode) {
    case TrainingMode::kFullBp: return "full_bp";
    case TrainingMode::kZoFeatCls1: return "zo_feat_cls1";
    case TrainingMode::kZoFeatCls2: return "zo_feat_cls2";
    case TrainingMode::kFullZo: return "full_zo";
  }
  return "unknown";
}

TrainingMode parse_training_mode(const std::string& name) {
  if (name == "full_bp") return TrainingMode::kFullBp;
  if (name == "zo_feat_cls1") return TrainingMode::kZoFeatCls1;
  if (name == "zo_feat_cls2") return TrainingMode::kZoFeatCls2;
  if (name == "full_zo") return TrainingMode::kFullZo;
  throw std::invalid_argument("unknown training mode '" + name + "'");
}

size_t partition_for(TrainingMode mode, std::span<const LayerSpec> layers) {
  switch (mode) {
    case TrainingMode::kFullBp: return 0;
    case TrainingMode::kZoFeatCls1: return trainable_from_end(layers, 2);
    case TrainingMode::kZoFeatCls2: return trainable_from_end(layers, 1);
    case TrainingMode::kFullZo: return layers.size();
  }
  return 0;
}

}  // namespace ezo
