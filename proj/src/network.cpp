// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/network.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "conv_util.h"
#include "ezo/instrumentation.h"
#include "ezo/loss.h"

namespace ezo {

using detail::ConvGeom;

Network::Network(Shape input_shape, std::vector<LayerSpec> layers,
                 bool with_bias)
    : layers_(std::move(layers)), with_bias_(with_bias) {
  if (layers_.empty()) throw std::invalid_argument("network has no layers");
  shapes_ = infer_shapes(input_shape, layers_);
  params_.resize(layers_.size());
  for (size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    if (!l.has_params()) continue;
    params_[i].weight = Tensor(l.weight_shape());
    if (with_bias_) params_[i].bias = Tensor({l.bias_count()});
  }
}

std::vector<size_t> Network::trainable_layers() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].has_params()) out.push_back(i);
  }
  return out;
}

size_t Network::num_parameters() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

Network make_lenet5(bool with_bias) {
  return Network(lenet5_input_shape(), lenet5_layers(), with_bias);
}

void init_parameters(Network& net, SeededGenerator& gen) {
  for (size_t i = 0; i < net.num_layers(); ++i) {
    const LayerSpec& l = net.layer(i);
    if (!l.has_params()) continue;
    const size_t fan_in = l.weight_count() / l.out;
    // He-uniform: keeps activation scale through ReLU stacks, so features
    // that are only ever moved by ZO still separate the inputs.
    const float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
    LayerParams& p = net.params(i);
    fill_uniform_real(gen, p.weight.values(), -bound, bound);
    std::fill(p.bias.values().begin(), p.bias.values().end(), 0.0f);
  }
}

// ---------------------------------------------------------------------------
// ActivationCache

struct CacheAccess {
  static void invalidate(ActivationCache& c) { c.valid_ = false; }
};

bool ActivationCache::holds(size_t j) const {
  return valid_ && j >= from_ && j - from_ < activations_.size();
}

const Tensor& ActivationCache::activation(size_t j) const {
  if (!holds(j)) {
    throw std::logic_error("activation a(" + std::to_string(j) +
                           ") is not held by the cache");
  }
  return activations_[j - from_];
}

const std::vector<uint32_t>& ActivationCache::pool_routes(size_t j) const {
  if (!holds(j)) {
    throw std::logic_error("pool routes for layer " + std::to_string(j) +
                           " are not held by the cache");
  }
  return pool_routes_[j - from_];
}

std::vector<size_t> ActivationCache::held_indices() const {
  std::vector<size_t> out;
  if (!valid_) return out;
  for (size_t k = 0; k < activations_.size(); ++k) out.push_back(from_ + k);
  return out;
}

size_t ActivationCache::bytes() const {
  if (!valid_) return 0;
  size_t n = 0;
  for (const auto& a : activations_) n += a.bytes();
  for (const auto& r : pool_routes_) n += r.size() * sizeof(uint32_t);
  return n;
}

void ActivationCache::clear() {
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

size_t batch_of(const Network& net, const Tensor& input) {
  const size_t per = shape_size(net.input_shape());
  if (input.rank() < 2 || input.dim(0) == 0 ||
      input.size() != input.dim(0) * per) {
    throw std::invalid_argument("input " + shape_string(input.shape()) +
                                " does not match network input " +
                                shape_string(net.input_shape()));
  }
  return input.dim(0);
}

Tensor conv_forward(const Network& net, size_t i, const Tensor& in,
                    size_t batch) {
  const LayerSpec& l = net.layer(i);
  const LayerParams& p = net.params(i);
  const ConvGeom g =
      conv_geom(l, net.activation_shape(i), net.activation_shape(i + 1));
  Tensor out(batched(batch, net.activation_shape(i + 1)));
  std::vector<float> col(g.rows() * g.cols());
  const size_t in_per = g.in_ch * g.in_h * g.in_w;
  const size_t out_per = l.out * g.cols();
  for (size_t b = 0; b < batch; ++b) {
    detail::im2col(in.data() + b * in_per, g, col.data());
    float* o = out.data() + b * out_per;
    for (size_t oc = 0; oc < l.out; ++oc) {
      float* orow = o + oc * g.cols();
      const float bias = p.bias.empty() ? 0.0f : p.bias[oc];
      std::fill(orow, orow + g.cols(), bias);
      const float* w = p.weight.data() + oc * g.rows();
      for (size_t r = 0; r < g.rows(); ++r) {
        detail::axpy(g.cols(), w[r], col.data() + r * g.cols(), orow);
      }
    }
  }
  return out;
}

Tensor fc_forward(const Network& net, size_t i, const Tensor& in,
                  size_t batch) {
  const LayerSpec& l = net.layer(i);
  const LayerParams& p = net.params(i);
  Tensor out({batch, l.out});
  for (size_t b = 0; b < batch; ++b) {
    const float* x = in.data() + b * l.in;
    for (size_t o = 0; o < l.out; ++o) {
      const float bias = p.bias.empty() ? 0.0f : p.bias[o];
      out[b * l.out + o] = bias + detail::dot(p.weight.data() + o * l.in, x, l.in);
    }
  }
  return out;
}

Tensor layer_forward(const Network& net, size_t i, const Tensor& in,
                     size_t batch, std::vector<uint32_t>* routes) {
  const LayerSpec& l = net.layer(i);
  const Shape& sin = net.activation_shape(i);
  switch (l.kind) {
    case LayerKind::kConv2d:
      return conv_forward(net, i, in, batch);
    case LayerKind::kFC:
      return fc_forward(net, i, in, batch);
    case LayerKind::kReLU: {
      Tensor out(in.shape());
      for (size_t k = 0; k < in.size(); ++k) out[k] = std::max(in[k], 0.0f);
      return out;
    }
    case LayerKind::kMaxPool2d: {
      const Shape& sout = net.activation_shape(i + 1);
      Tensor out(batched(batch, sout));
      const size_t in_per = shape_size(sin), out_per = shape_size(sout);
      if (routes != nullptr) routes->assign(batch * out_per, 0);
      for (size_t b = 0; b < batch; ++b) {
        detail::maxpool_forward(
            in.data() + b * in_per, sin[0], sin[1], sin[2], l.kernel,
            out.data() + b * out_per,
            routes != nullptr ? routes->data() + b * out_per : nullptr);
      }
      return out;
    }
    case LayerKind::kFlatten:
      return in.reshaped(batched(batch, net.activation_shape(i + 1)));
  }
  throw std::logic_error("unhandled layer kind");
}

Tensor run_forward(const Network& net, const Tensor& input,
                   size_t cache_from, std::vector<Tensor>* acts,
                   std::vector<std::vector<uint32_t>>* routes) {
  const size_t batch = batch_of(net, input);
  const size_t L = net.num_layers();
  ++counters().forward_passes;
  Tensor x = input.reshaped(batched(batch, net.input_shape()));
  for (size_t i = 0; i < L; ++i) {
    const bool keep = acts != nullptr && i >= cache_from;
    if (acts != nullptr && i == cache_from) acts->push_back(x);
    std::vector<uint32_t>* r = keep ? &routes->emplace_back() : nullptr;
    x = layer_forward(net, i, x, batch, r);
    if (keep) acts->push_back(x);
  }
  if (acts != nullptr) {
    if (cache_from == L) acts->push_back(x);
    routes->emplace_back();  // a(L) feeds no layer
  }
  return x.reshaped({batch, net.num_classes()});
}

// Parameter gradients of one layer given the error at its output; writes the
// error at its input into `din` when non-null.
void conv_backward(const Network& net, size_t i, const Tensor& in,
                   const Tensor& dout, size_t batch, ParamGrad& grad,
                   Tensor* din) {
  const LayerSpec& l = net.layer(i);
  const LayerParams& p = net.params(i);
  const ConvGeom g =
      conv_geom(l, net.activation_shape(i), net.activation_shape(i + 1));
  const size_t rows = g.rows(), cols = g.cols();
  const size_t in_per = g.in_ch * g.in_h * g.in_w;
  const size_t out_per = l.out * cols;
  std::vector<float> col(rows * cols);
  std::vector<float> dcol(din != nullptr ? rows * cols : 0);
  for (size_t b = 0; b < batch; ++b) {
    detail::im2col(in.data() + b * in_per, g, col.data());
    const float* e = dout.data() + b * out_per;
    for (size_t oc = 0; oc < l.out; ++oc) {
      const float* erow = e + oc * cols;
      float* gw = grad.weight.data() + oc * rows;
      for (size_t r = 0; r < rows; ++r) {
        gw[r] += detail::dot(erow, col.data() + r * cols, cols);
      }
      if (!grad.bias.empty()) {
        float s = 0.0f;
        for (size_t k = 0; k < cols; ++k) s += erow[k];
        grad.bias[oc] += s;
      }
    }
    if (din != nullptr) {
      std::fill(dcol.begin(), dcol.end(), 0.0f);
      for (size_t oc = 0; oc < l.out; ++oc) {
        const float* erow = e + oc * cols;
        const float* w = p.weight.data() + oc * rows;
        for (size_t r = 0; r < rows; ++r) {
          detail::axpy(cols, w[r], erow, dcol.data() + r * cols);
        }
      }
      detail::col2im_add(dcol.data(), g, din->data() + b * in_per);
    }
  }
}

void fc_backward(const Network& net, size_t i, const Tensor& in,
                 const Tensor& dout, size_t batch, ParamGrad& grad,
                 Tensor* din) {
  const LayerSpec& l = net.layer(i);
  const LayerParams& p = net.params(i);
  for (size_t b = 0; b < batch; ++b) {
    const float* x = in.data() + b * l.in;
    const float* e = dout.data() + b * l.out;
    for (size_t o = 0; o < l.out; ++o) {
      detail::axpy(l.in, e[o], x, grad.weight.data() + o * l.in);
      if (!grad.bias.empty()) grad.bias[o] += e[o];
      if (din != nullptr) {
        detail::axpy(l.in, e[o], p.weight.data() + o * l.in,
                     din->data() + b * l.in);
      }
    }
  }
}

}  // namespace

Tensor forward(const Network& net, const Tensor& input) {
  return run_forward(net, input, net.num_layers() + 1, nullptr, nullptr);
}

Tensor forward(const Network& net, const Tensor& input, ActivationCache& cache,
               size_t cache_from) {
  if (cache_from > net.num_layers()) {
    throw std::out_of_range("cache_from beyond the last activation");
  }
  cache.clear();
  std::vector<Tensor> acts;
  std::vector<std::vector<uint32_t>> routes;
  Tensor logits = run_forward(net, input, cache_from, &acts, &routes);
  cache.activations_ = std::move(acts);
  cache.pool_routes_ = std::move(routes);
  cache.from_ = cache_from;
  cache.batch_ = input.dim(0);
  cache.valid_ = true;
  return logits;
}

GradientSet backward_partial(const Network& net, ActivationCache& cache,
                             std::span<const int> labels) {
  if (!cache.valid()) {
    throw std::logic_error(
        "backward_partial needs a fresh cached forward pass");
  }
  const size_t L = net.num_layers();
  const size_t from = cache.from();
  const size_t batch = cache.batch_size();
  Counters& ctr = counters();

  const Tensor logits =
      cache.activation(L).reshaped({batch, net.num_classes()});
  Tensor err = cross_entropy_grad(logits, labels);
  err = std::move(err).reshaped(batched(batch, net.activation_shape(L)));
  size_t grad_bytes = 0;
  size_t peak = cache.bytes() + err.bytes();
  ++ctr.gradient_buffers;
  ctr.gradient_bytes += err.bytes();

  GradientSet grads;
  for (size_t i = L; i-- > from;) {
    const LayerSpec& l = net.layer(i);
    const Tensor& in = cache.activation(i);
    const bool need_din = i > from;
    Tensor din;
    if (need_din) {
      din = Tensor(batched(batch, net.activation_shape(i)));
      ++ctr.gradient_buffers;
      ctr.gradient_bytes += din.bytes();
    }
    switch (l.kind) {
      case LayerKind::kConv2d:
      case LayerKind::kFC: {
        ParamGrad g;
        g.layer = i;
        g.weight = Tensor(l.weight_shape());
        if (net.with_bias()) g.bias = Tensor({l.bias_count()});
        ++ctr.gradient_buffers;
        ctr.gradient_bytes += g.weight.bytes() + g.bias.bytes();
        grad_bytes += g.weight.bytes() + g.bias.bytes();
        if (l.kind == LayerKind::kConv2d) {
          conv_backward(net, i, in, err, batch, g, need_din ? &din : nullptr);
        } else {
          fc_backward(net, i, in, err, batch, g, need_din ? &din : nullptr);
        }
        grads.push_back(std::move(g));
        break;
      }
      case LayerKind::kReLU:
        if (need_din) {
          for (size_t k = 0; k < din.size(); ++k) {
            din[k] = in[k] > 0.0f ? err[k] : 0.0f;
          }
        }
        break;
      case LayerKind::kMaxPool2d:
        if (need_din) {
          const auto& routes = cache.pool_routes(i);
          const size_t in_per = shape_size(net.activation_shape(i));
          const size_t out_per = shape_size(net.activation_shape(i + 1));
          for (size_t b = 0; b < batch; ++b) {
            for (size_t o = 0; o < out_per; ++o) {
              din[b * in_per + routes[b * out_per + o]] += err[b * out_per + o];
            }
          }
        }
        break;
      case LayerKind::kFlatten:
        if (need_din) {
          din = err.reshaped(batched(batch, net.activation_shape(i)));
        }
        break;
    }
    peak = std::max(peak, cache.bytes() + grad_bytes + err.bytes() +
                              din.bytes());
    if (need_din) err = std::move(din);
  }
  ctr.peak_aux_bytes = std::max<uint64_t>(ctr.peak_aux_bytes, peak);
  CacheAccess::invalidate(cache);
  return grads;
}

}  // namespace ezo
