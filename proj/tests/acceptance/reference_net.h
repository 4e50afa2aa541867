// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Straight-loop double-precision forward pass used as a finite-difference
// oracle. Deliberately shares no code with the library kernels. Besides the
// loss it records every ReLU sign and max-pool winner, so callers can tell
// when a perturbation crossed a point where the loss is not differentiable.

#ifndef EZO_TESTS_ACCEPTANCE_REFERENCE_NET_H_
#define EZO_TESTS_ACCEPTANCE_REFERENCE_NET_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include "ezo/network.h"

namespace ezo::reference {

struct Params {
  std::vector<std::vector<double>> weight, bias;  // per layer

  explicit Params(const Network& net)
      : weight(net.num_layers()), bias(net.num_layers()) {
    for (size_t i : net.trainable_layers()) {
      const auto& p = net.params(i);
      weight[i].assign(p.weight.values().begin(), p.weight.values().end());
      bias[i].assign(p.bias.values().begin(), p.bias.values().end());
    }
  }
};

struct Result {
  double loss = 0;
  std::vector<int> pattern;  // ReLU signs and pool winners, in order
};

inline Result loss(const Network& net, const Params& p, const Tensor& x,
                   const std::vector<int>& labels) {
  Result r;
  const size_t batch = x.dim(0);
  const size_t in_per = x.size() / batch;
  for (size_t n = 0; n < batch; ++n) {
    std::vector<double> a(x.data() + n * in_per, x.data() + (n + 1) * in_per);
    for (size_t i = 0; i < net.num_layers(); ++i) {
      const LayerSpec& l = net.layer(i);
      const Shape& si = net.activation_shape(i);
      const Shape& so = net.activation_shape(i + 1);
      std::vector<double> out(shape_size(so), 0.0);
      switch (l.kind) {
        case LayerKind::kConv2d: {
          const long H = static_cast<long>(si[1]), W = static_cast<long>(si[2]);
          const long K = l.kernel, P = l.pad;
          const long OH = static_cast<long>(so[1]), OW = static_cast<long>(so[2]);
          for (size_t oc = 0; oc < l.out; ++oc) {
            for (long oy = 0; oy < OH; ++oy) {
              for (long ox = 0; ox < OW; ++ox) {
                double s = p.bias[i].empty() ? 0.0 : p.bias[i][oc];
                for (size_t c = 0; c < l.in; ++c) {
                  for (long ky = 0; ky < K; ++ky) {
                    for (long kx = 0; kx < K; ++kx) {
                      const long iy = oy + ky - P, ix = ox + kx - P;
                      if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                      s += p.weight[i][((oc * l.in + c) * K + ky) * K + kx] *
                           a[(c * H + iy) * W + ix];
                    }
                  }
                }
                out[(oc * OH + oy) * OW + ox] = s;
              }
            }
          }
          break;
        }
        case LayerKind::kFC:
          for (size_t o = 0; o < l.out; ++o) {
            double s = p.bias[i].empty() ? 0.0 : p.bias[i][o];
            for (size_t k = 0; k < l.in; ++k) s += p.weight[i][o * l.in + k] * a[k];
            out[o] = s;
          }
          break;
        case LayerKind::kReLU:
          for (size_t k = 0; k < a.size(); ++k) {
            r.pattern.push_back(a[k] > 0);
            out[k] = a[k] > 0 ? a[k] : 0.0;
          }
          break;
        case LayerKind::kMaxPool2d: {
          const size_t C = si[0], H = si[1], W = si[2], K = l.kernel;
          for (size_t c = 0; c < C; ++c) {
            for (size_t y = 0; y < H / K; ++y) {
              for (size_t xx = 0; xx < W / K; ++xx) {
                size_t best = (c * H + y * K) * W + xx * K;
                for (size_t dy = 0; dy < K; ++dy) {
                  for (size_t dx = 0; dx < K; ++dx) {
                    const size_t idx = (c * H + y * K + dy) * W + xx * K + dx;
                    if (a[idx] > a[best]) best = idx;
                  }
                }
                r.pattern.push_back(static_cast<int>(best));
                out[(c * (H / K) + y) * (W / K) + xx] = a[best];
              }
            }
          }
          break;
        }
        case LayerKind::kFlatten:
          out = a;
          break;
      }
      a = std::move(out);
    }
    const double mx = *std::max_element(a.begin(), a.end());
    double sum = 0;
    for (double v : a) sum += std::exp(v - mx);
    r.loss += std::log(sum) + mx - a[labels[n]];
  }
  r.loss /= static_cast<double>(batch);
  return r;
}

}  // namespace ezo::reference

#endif  // EZO_TESTS_ACCEPTANCE_REFERENCE_NET_H_
