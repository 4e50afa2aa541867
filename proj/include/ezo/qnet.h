// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// 8-bit integer network: int8 x int8 products accumulated in integers, one
// exponent per tensor, requantization back to int8 after every parameterized
// layer, and an integer backward pass whose updates are rounded to a few bits.

#ifndef EZO_QNET_H_
#define EZO_QNET_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ezo/layers.h"
#include "ezo/prng.h"
#include "ezo/qtensor.h"

namespace ezo {

class QuantNetwork {
 public:
  // Parameter exponents are fixed at construction; the network has no biases.
  QuantNetwork(Shape input_shape, std::vector<LayerSpec> layers,
               int param_exponent = -7);

  size_t num_layers() const { return layers_.size(); }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const LayerSpec& layer(size_t i) const { return layers_.at(i); }
  const Shape& input_shape() const { return shapes_.front(); }
  const Shape& activation_shape(size_t j) const { return shapes_.at(j); }
  size_t num_classes() const { return shape_size(shapes_.back()); }

  // Data may change; the exponent may not.
  std::span<int8_t> weights(size_t i) { return weights_.at(i).data; }
  const QuantTensor& weight(size_t i) const { return weights_.at(i); }
  // Replaces a layer's weights, keeping its exponent.
  void set_weights(size_t i, std::span<const int8_t> values);

  std::vector<size_t> trainable_layers() const;
  size_t num_parameters() const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  std::vector<QuantTensor> weights_;
};

QuantNetwork make_lenet5_int8(int param_exponent = -7);

// Weights uniform on [-r_init, r_init], layer by layer from `gen`.
void init_quant_parameters(QuantNetwork& net, SeededGenerator& gen,
                           int r_init = 64);

// data = round-half-up(pixel * 127), exponent -7; pixels must lie in [0, 1].
// Runs once per dataset, outside training steps.
QuantTensor quantize_input(const Tensor& images);

// Int8 activations a(from)..a(L) of the latest cached forward pass.
class QuantActivationCache {
 public:
  bool valid() const { return valid_; }
  size_t from() const { return from_; }
  size_t batch_size() const { return batch_; }
  bool holds(size_t j) const;
  const QuantTensor& activation(size_t j) const;
  const std::vector<uint32_t>& pool_routes(size_t j) const;
  std::vector<size_t> held_indices() const;
  size_t bytes() const;
  void clear();
  void invalidate() { valid_ = false; }

 private:
  friend QuantTensor q_forward(const QuantNetwork&, const QuantTensor&,
                               QuantActivationCache*, size_t);
  bool valid_ = false;
  size_t from_ = 0;
  size_t batch_ = 0;
  std::vector<QuantTensor> activations_;
  std::vector<std::vector<uint32_t>> pool_routes_;
};

// Returns (B, K) int8 logits. With a cache, retains a(cache_from)..a(L).
// Throws std::overflow_error for a layer whose worst-case accumulator would
// not fit in int32.
QuantTensor q_forward(const QuantNetwork& net, const QuantTensor& input,
                      QuantActivationCache* cache = nullptr,
                      size_t cache_from = 0);

// Integer approximation of softmax(logits) - onehot per sample, as int8 with
// exponent -7. The softmax uses base-2 exponents with `frac_bits` fractional
// bits (0 or 4).
QuantTensor int_ce_output_grad(const QuantTensor& logits,
                               std::span<const int> labels,
                               int frac_bits = 4);

// Backpropagates from the cached logits down to layer cache.from(); each
// parameterized layer >= from is updated in place by its gradient rounded to
// `bits_bp` bits and clamped to [-127, 127]. Consumes the cache.
void q_backward_partial(QuantNetwork& net, QuantActivationCache& cache,
                        std::span<const int> labels, int bits_bp,
                        int ce_frac_bits = 4);

// Same, starting from a given output error (shaped like the logits).
void q_backward_from_error(QuantNetwork& net, QuantActivationCache& cache,
                           QuantTensor output_error, int bits_bp);

// Number of rows whose first maximal logit equals the label.
size_t count_correct(const QuantTensor& logits, std::span<const int> labels);

}  // namespace ezo

#endif  // EZO_QNET_H_
