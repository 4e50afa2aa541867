// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// FP32 network: parameters, forward pass with a partial activation cache, and
// backpropagation restricted to the layers after a partition point.

#ifndef EZO_NETWORK_H_
#define EZO_NETWORK_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ezo/layers.h"
#include "ezo/prng.h"
#include "ezo/tensor.h"

namespace ezo {

// Weight and bias of one layer. Both are empty for parameter-free layers; the
// bias is also empty for bias-free networks.
struct LayerParams {
  Tensor weight;
  Tensor bias;

  size_t size() const { return weight.size() + bias.size(); }
};

class Network {
 public:
  Network(Shape input_shape, std::vector<LayerSpec> layers,
          bool with_bias = true);

  size_t num_layers() const { return layers_.size(); }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const LayerSpec& layer(size_t i) const { return layers_.at(i); }
  bool with_bias() const { return with_bias_; }

  const Shape& input_shape() const { return shapes_.front(); }
  // Per-sample shape of a(j), j in [0, L].
  const Shape& activation_shape(size_t j) const { return shapes_.at(j); }
  size_t num_classes() const { return shape_size(shapes_.back()); }

  LayerParams& params(size_t i) { return params_.at(i); }
  const LayerParams& params(size_t i) const { return params_.at(i); }

  std::vector<size_t> trainable_layers() const;
  size_t num_parameters() const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  std::vector<LayerParams> params_;
  bool with_bias_;
};

Network make_lenet5(bool with_bias = true);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, drawn layer
// by layer from `gen`.
void init_parameters(Network& net, SeededGenerator& gen);

// Activations a(from)..a(L) of the most recent cached forward pass, plus the
// max-pool routing indices needed to backpropagate through those layers.
class ActivationCache {
 public:
  bool valid() const { return valid_; }
  size_t from() const { return from_; }
  size_t batch_size() const { return batch_; }
  bool holds(size_t j) const;
  // Throws std::logic_error when a(j) is not held.
  const Tensor& activation(size_t j) const;
  const std::vector<uint32_t>& pool_routes(size_t j) const;
  // Activation indices currently held, ascending.
  std::vector<size_t> held_indices() const;
  size_t bytes() const;

  void clear();

 private:
  friend Tensor forward(const Network&, const Tensor&, ActivationCache&,
                        size_t);
  friend struct CacheAccess;

  bool valid_ = false;
  size_t from_ = 0;
  size_t batch_ = 0;
  std::vector<Tensor> activations_;                // a(from)..a(L)
  std::vector<std::vector<uint32_t>> pool_routes_;  // same indexing
};

// Input is (B, C, H, W) or (B, features) matching the network input; returns
// (B, num_classes) logits. Pure with respect to the parameters.
Tensor forward(const Network& net, const Tensor& input);

// Same, additionally retaining a(cache_from)..a(L) in `cache` (replacing its
// previous contents). cache_from must lie in [0, L].
Tensor forward(const Network& net, const Tensor& input, ActivationCache& cache,
               size_t cache_from);

struct ParamGrad {
  size_t layer = 0;
  Tensor weight;
  Tensor bias;
};
using GradientSet = std::vector<ParamGrad>;

// Backpropagates mean cross-entropy from the cached logits a(L) down to layer
// cache.from(). Returns parameter gradients for trainable layers >= from, in
// descending layer order; no error is propagated below layer `from`. Consumes
// the cache: a second call without a new forward throws std::logic_error.
GradientSet backward_partial(const Network& net, ActivationCache& cache,
                             std::span<const int> labels);

}  // namespace ezo

#endif  // EZO_NETWORK_H_
