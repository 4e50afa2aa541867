// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Integer-only: this file must not contain floating-point arithmetic.

#include "ezo/qnet.h"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "conv_util.h"
#include "ezo/instrumentation.h"
#include "ezo/intexp.h"

namespace ezo {

using detail::ConvGeom;

QuantNetwork::QuantNetwork(Shape input_shape, std::vector<LayerSpec> layers,
                           int param_exponent)
    : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("network has no layers");
  shapes_ = infer_shapes(input_shape, layers_);
  weights_.resize(layers_.size());
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].has_params()) {
      weights_[i] = QuantTensor(layers_[i].weight_shape(), param_exponent);
    }
  }
}

void QuantNetwork::set_weights(size_t i, std::span<const int8_t> values) {
  QuantTensor& w = weights_.at(i);
  if (values.size() != w.size()) {
    throw std::invalid_argument("weight count mismatch for layer " +
                                std::to_string(i));
  }
  for (size_t k = 0; k < values.size(); ++k) w.data[k] = clamp_int8(values[k]);
}

std::vector<size_t> QuantNetwork::trainable_layers() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].has_params()) out.push_back(i);
  }
  return out;
}

size_t QuantNetwork::num_parameters() const {
  size_t n = 0;
  for (const auto& w : weights_) n += w.size();
  return n;
}

QuantNetwork make_lenet5_int8(int param_exponent) {
  return QuantNetwork(lenet5_input_shape(), lenet5_layers(), param_exponent);
}

void init_quant_parameters(QuantNetwork& net, SeededGenerator& gen,
                           int r_init) {
  for (size_t i : net.trainable_layers()) {
    fill_uniform_int8(gen, net.weights(i), r_init);
  }
}

// ---------------------------------------------------------------------------
// Cache

bool QuantActivationCache::holds(size_t j) const {
  return valid_ && j >= from_ && j - from_ < activations_.size();
}

const QuantTensor& QuantActivationCache::activation(size_t j) const {
  if (!holds(j)) {
    throw std::logic_error("activation a(" + std::to_string(j) +
                           ") is not held by the cache");
  }
  return activations_[j - from_];
}

const std::vector<uint32_t>& QuantActivationCache::pool_routes(
    size_t j) const {
  if (!holds(j)) {
    throw std::logic_error("pool routes for layer " + std::to_string(j) +
                           " are not held by the cache");
  }
  return pool_routes_[j - from_];
}

std::vector<size_t> QuantActivationCache::held_indices() const {
  std::vector<size_t> out;
  if (!valid_) return out;
  for (size_t k = 0; k < activations_.size(); ++k) out.push_back(from_ + k);
  return out;
}

size_t QuantActivationCache::bytes() const {
  if (!valid_) return 0;
  size_t n = 0;
  for (const auto& a : activations_) n += a.bytes();
  for (const auto& r : pool_routes_) n += r.size() * sizeof(uint32_t);
  return n;
}

void QuantActivationCache::clear() {
  valid_ = false;
  from_ = 0;
  batch_ = 0;
  activations_.clear();
  pool_routes_.clear();
}

// ---------------------------------------------------------------------------
// Forward

namespace {

Shape batched(size_t batch, const Shape& sample) {
  Shape s{batch};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

ConvGeom conv_geom(const LayerSpec& l, const Shape& in, const Shape& out) {
  return {in[0], in[1], in[2], l.kernel, l.pad, out[1], out[2]};
}

void check_accumulator_budget(const LayerSpec& l, size_t terms) {
  const int64_t worst = static_cast<int64_t>(terms) * 127 * 127;
  if (worst > std::numeric_limits<int32_t>::max()) {
    throw std::overflow_error(l.describe() + " sums " + std::to_string(terms) +
                              " products; int32 accumulator may overflow");
  }
}

QuantTensor conv_forward(const QuantNetwork& net, size_t i,
                         const QuantTensor& in, size_t batch) {
  const LayerSpec& l = net.layer(i);
  const QuantTensor& w = net.weight(i);
  const ConvGeom g =
      conv_geom(l, net.activation_shape(i), net.activation_shape(i + 1));
  check_accumulator_budget(l, g.rows());
  Accum32 acc(batched(batch, net.activation_shape(i + 1)),
              in.exponent + w.exponent);
  std::vector<int8_t> col(g.rows() * g.cols());
  const size_t in_per = g.in_ch * g.in_h * g.in_w;
  const size_t out_per = l.out * g.cols();
  for (size_t b = 0; b < batch; ++b) {
    detail::im2col(in.data.data() + b * in_per, g, col.data());
    int32_t* o = acc.data.data() + b * out_per;
    for (size_t oc = 0; oc < l.out; ++oc) {
      int32_t* orow = o + oc * g.cols();
      const int8_t* wr = w.data.data() + oc * g.rows();
      for (size_t r = 0; r < g.rows(); ++r) {
        if (wr[r] == 0) continue;
        detail::axpy<int32_t, int8_t>(g.cols(), wr[r],
                                      col.data() + r * g.cols(), orow);
      }
    }
  }
  return requantize(acc);
}

QuantTensor fc_forward(const QuantNetwork& net, size_t i,
                       const QuantTensor& in, size_t batch) {
  const LayerSpec& l = net.layer(i);
  const QuantTensor& w = net.weight(i);
  check_accumulator_budget(l, l.in);
  Accum32 acc({batch, l.out}, in.exponent + w.exponent);
  for (size_t b = 0; b < batch; ++b) {
    const int8_t* x = in.data.data() + b * l.in;
    for (size_t o = 0; o < l.out; ++o) {
      acc.data[b * l.out + o] =
          detail::dot_acc<int32_t>(w.data.data() + o * l.in, x, l.in);
    }
  }
  return requantize(acc);
}

QuantTensor layer_forward(const QuantNetwork& net, size_t i,
                          const QuantTensor& in, size_t batch,
                          std::vector<uint32_t>* routes) {
  const LayerSpec& l = net.layer(i);
  const Shape& sin = net.activation_shape(i);
  switch (l.kind) {
    case LayerKind::kConv2d:
      return conv_forward(net, i, in, batch);
    case LayerKind::kFC:
      return fc_forward(net, i, in, batch);
    case LayerKind::kReLU: {
      QuantTensor out(in.shape, in.exponent);
      for (size_t k = 0; k < in.size(); ++k) {
        out.data[k] = in.data[k] > 0 ? in.data[k] : int8_t{0};
      }
      return out;
    }
    case LayerKind::kMaxPool2d: {
      const Shape& sout = net.activation_shape(i + 1);
      QuantTensor out(batched(batch, sout), in.exponent);
      const size_t in_per = shape_size(sin), out_per = shape_size(sout);
      if (routes != nullptr) routes->assign(batch * out_per, 0);
      for (size_t b = 0; b < batch; ++b) {
        detail::maxpool_forward(
            in.data.data() + b * in_per, sin[0], sin[1], sin[2], l.kernel,
            out.data.data() + b * out_per,
            routes != nullptr ? routes->data() + b * out_per : nullptr);
      }
      return out;
    }
    case LayerKind::kFlatten: {
      QuantTensor out = in;
      out.shape = batched(batch, net.activation_shape(i + 1));
      return out;
    }
  }
  throw std::logic_error("unhandled layer kind");
}

}  // namespace

QuantTensor q_forward(const QuantNetwork& net, const QuantTensor& input,
                      QuantActivationCache* cache, size_t cache_from) {
  const size_t per = shape_size(net.input_shape());
  if (input.shape.size() < 2 || input.shape[0] == 0 ||
      input.size() != input.shape[0] * per) {
    throw std::invalid_argument("input " + shape_string(input.shape) +
                                " does not match network input " +
                                shape_string(net.input_shape()));
  }
  const size_t L = net.num_layers();
  if (cache != nullptr && cache_from > L) {
    throw std::out_of_range("cache_from beyond the last activation");
  }
  const size_t batch = input.shape[0];
  ++counters().forward_passes;

  std::vector<QuantTensor> acts;
  std::vector<std::vector<uint32_t>> routes;
  QuantTensor x = input;
  x.shape = batched(batch, net.input_shape());
  for (size_t i = 0; i < L; ++i) {
    const bool keep = cache != nullptr && i >= cache_from;
    if (cache != nullptr && i == cache_from) acts.push_back(x);
    std::vector<uint32_t>* r = keep ? &routes.emplace_back() : nullptr;
    x = layer_forward(net, i, x, batch, r);
    if (keep) acts.push_back(x);
  }
  if (cache != nullptr) {
    if (cache_from == L) acts.push_back(x);
    routes.emplace_back();
    cache->activations_ = std::move(acts);
    cache->pool_routes_ = std::move(routes);
    cache->from_ = cache_from;
    cache->batch_ = batch;
    cache->valid_ = true;
  }
  x.shape = {batch, net.num_classes()};
  return x;
}

// ---------------------------------------------------------------------------
// Output error

QuantTensor int_ce_output_grad(const QuantTensor& logits,
                               std::span<const int> labels, int frac_bits) {
  if (logits.shape.size() != 2) {
    throw std::invalid_argument("logits must be (B, K)");
  }
  const size_t b = logits.shape[0], k = logits.shape[1];
  if (labels.size() != b) {
    throw std::invalid_argument("label count does not match batch size");
  }
  QuantTensor err({b, k}, -7);
  std::vector<uint64_t> terms(k);
  const int64_t offset = int64_t{kExpWindow} << frac_bits;
  for (size_t n = 0; n < b; ++n) {
    const int y = labels[n];
    if (y < 0 || static_cast<size_t>(y) >= k) {
      throw std::out_of_range("label outside the class range");
    }
    const int8_t* row = logits.data.data() + n * k;
    const int8_t vmax = *std::max_element(row, row + k);
    uint64_t sum = 0;
    for (size_t j = 0; j < k; ++j) {
      const int64_t h =
          scaled_log2_diff(int64_t{row[j]} - vmax, logits.exponent, frac_bits);
      terms[j] = pow2_q15(std::max<int64_t>(h + offset, 0), frac_bits);
      sum += terms[j];
    }
    int8_t* e = err.data.data() + n * k;
    for (size_t j = 0; j < k; ++j) {
      const int64_t q = static_cast<int64_t>((terms[j] * 127 + sum / 2) / sum);
      e[j] = clamp_int8(q - (static_cast<int>(j) == y ? 127 : 0));
    }
  }
  return err;
}

// ---------------------------------------------------------------------------
// Backward

namespace {

void note_scratch(size_t bytes) {
  ++counters().gradient_buffers;
  counters().gradient_bytes += bytes;
}

void apply_update(QuantNetwork& net, size_t i, std::span<const int64_t> grad,
                  int bits) {
  std::vector<int32_t> step(grad.size());
  round_to_bits(grad, bits, step);
  std::span<int8_t> w = net.weights(i);
  for (size_t k = 0; k < w.size(); ++k) {
    w[k] = clamp_int8(int32_t{w[k]} - step[k]);
  }
}

// Returns the input error when `want_din`; updates the layer's weights.
QuantTensor conv_backward(QuantNetwork& net, size_t i, const QuantTensor& in,
                          const QuantTensor& err, size_t batch, int bits,
                          bool want_din) {
  const LayerSpec& l = net.layer(i);
  const QuantTensor& w = net.weight(i);
  const ConvGeom g =
      conv_geom(l, net.activation_shape(i), net.activation_shape(i + 1));
  const size_t rows = g.rows(), cols = g.cols();
  const size_t in_per = g.in_ch * g.in_h * g.in_w;
  const size_t out_per = l.out * cols;

  std::vector<int64_t> grad(l.out * rows, 0);
  note_scratch(grad.size() * sizeof(int32_t));
  std::vector<int8_t> col(rows * cols);
  std::vector<int32_t> dcol;
  std::vector<int32_t> din_acc;
  if (want_din) {
    dcol.resize(rows * cols);
    din_acc.assign(batch * in_per, 0);
    note_scratch(din_acc.size() * sizeof(int32_t));
  }
  for (size_t b = 0; b < batch; ++b) {
    detail::im2col(in.data.data() + b * in_per, g, col.data());
    const int8_t* e = err.data.data() + b * out_per;
    for (size_t oc = 0; oc < l.out; ++oc) {
      const int8_t* erow = e + oc * cols;
      int64_t* gw = grad.data() + oc * rows;
      for (size_t r = 0; r < rows; ++r) {
        gw[r] += detail::dot_acc<int32_t>(erow, col.data() + r * cols, cols);
      }
    }
    if (want_din) {
      std::fill(dcol.begin(), dcol.end(), 0);
      for (size_t oc = 0; oc < l.out; ++oc) {
        const int8_t* erow = e + oc * cols;
        const int8_t* wr = w.data.data() + oc * rows;
        for (size_t r = 0; r < rows; ++r) {
          if (wr[r] == 0) continue;
          detail::axpy<int32_t, int8_t>(cols, wr[r], erow,
                                        dcol.data() + r * cols);
        }
      }
      detail::col2im_add(dcol.data(), g, din_acc.data() + b * in_per);
    }
  }
  QuantTensor din;
  if (want_din) {
    Accum32 acc(batched(batch, net.activation_shape(i)),
                err.exponent + w.exponent);
    acc.data = std::move(din_acc);
    din = requantize(acc);
  }
  apply_update(net, i, grad, bits);
  return din;
}

QuantTensor fc_backward(QuantNetwork& net, size_t i, const QuantTensor& in,
                        const QuantTensor& err, size_t batch, int bits,
                        bool want_din) {
  const LayerSpec& l = net.layer(i);
  const QuantTensor& w = net.weight(i);
  std::vector<int64_t> grad(l.out * l.in, 0);
  note_scratch(grad.size() * sizeof(int32_t));
  Accum32 acc;
  if (want_din) {
    acc = Accum32({batch, l.in}, err.exponent + w.exponent);
    note_scratch(acc.bytes());
  }
  for (size_t b = 0; b < batch; ++b) {
    const int8_t* x = in.data.data() + b * l.in;
    const int8_t* e = err.data.data() + b * l.out;
    for (size_t o = 0; o < l.out; ++o) {
      if (e[o] == 0) continue;
      detail::axpy<int64_t, int8_t>(l.in, e[o], x, grad.data() + o * l.in);
      if (want_din) {
        detail::axpy<int32_t, int8_t>(l.in, e[o], w.data.data() + o * l.in,
                                      acc.data.data() + b * l.in);
      }
    }
  }
  QuantTensor din;
  if (want_din) din = requantize(acc);
  apply_update(net, i, grad, bits);
  return din;
}

}  // namespace

void q_backward_partial(QuantNetwork& net, QuantActivationCache& cache,
                        std::span<const int> labels, int bits_bp,
                        int ce_frac_bits) {
  if (!cache.valid()) {
    throw std::logic_error(
        "q_backward_partial needs a fresh cached forward pass");
  }
  const size_t L = net.num_layers();
  if (cache.from() == L) {
    cache.invalidate();
    return;
  }
  QuantTensor logits = cache.activation(L);
  logits.shape = {cache.batch_size(), net.num_classes()};
  q_backward_from_error(net, cache,
                        int_ce_output_grad(logits, labels, ce_frac_bits),
                        bits_bp);
}

void q_backward_from_error(QuantNetwork& net, QuantActivationCache& cache,
                           QuantTensor err, int bits_bp) {
  if (!cache.valid()) {
    throw std::logic_error(
        "q_backward_from_error needs a fresh cached forward pass");
  }
  if (bits_bp < 1 || bits_bp > 7) {
    throw std::invalid_argument("b_BP must lie in [1, 7]");
  }
  const size_t L = net.num_layers();
  const size_t from = cache.from();
  const size_t batch = cache.batch_size();
  if (from == L) {
    cache.invalidate();
    return;
  }
  if (err.size() != batch * net.num_classes()) {
    throw std::invalid_argument("output error does not match the logits");
  }
  err.shape = batched(batch, net.activation_shape(L));

  for (size_t i = L; i-- > from;) {
    const LayerSpec& l = net.layer(i);
    const QuantTensor& in = cache.activation(i);
    const bool want_din = i > from;
    QuantTensor din;
    switch (l.kind) {
      case LayerKind::kConv2d:
        din = conv_backward(net, i, in, err, batch, bits_bp, want_din);
        break;
      case LayerKind::kFC:
        din = fc_backward(net, i, in, err, batch, bits_bp, want_din);
        break;
      case LayerKind::kReLU:
        if (want_din) {
          din = QuantTensor(in.shape, err.exponent);
          for (size_t k = 0; k < din.size(); ++k) {
            din.data[k] = in.data[k] > 0 ? err.data[k] : int8_t{0};
          }
        }
        break;
      case LayerKind::kMaxPool2d:
        if (want_din) {
          din = QuantTensor(in.shape, err.exponent);
          const auto& routes = cache.pool_routes(i);
          const size_t in_per = shape_size(net.activation_shape(i));
          const size_t out_per = shape_size(net.activation_shape(i + 1));
          for (size_t b = 0; b < batch; ++b) {
            for (size_t o = 0; o < out_per; ++o) {
              din.data[b * in_per + routes[b * out_per + o]] =
                  err.data[b * out_per + o];
            }
          }
        }
        break;
      case LayerKind::kFlatten:
        if (want_din) {
          din = err;
          din.shape = batched(batch, net.activation_shape(i));
        }
        break;
    }
    if (want_din) err = std::move(din);
  }
  cache.invalidate();
}

size_t count_correct(const QuantTensor& logits, std::span<const int> labels) {
  if (logits.shape.size() != 2 || logits.shape[0] != labels.size()) {
    throw std::invalid_argument("logits must be (B, K) matching the labels");
  }
  const size_t b = logits.shape[0], k = logits.shape[1];
  size_t correct = 0;
  for (size_t n = 0; n < b; ++n) {
    const int8_t* row = logits.data.data() + n * k;
    const size_t best = static_cast<size_t>(std::max_element(row, row + k) - row);
    if (static_cast<int>(best) == labels[n]) ++correct;
  }
  return correct;
}

}  // namespace ezo
