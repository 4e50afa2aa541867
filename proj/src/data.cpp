// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/data.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "ezo/prng.h"

namespace ezo {

namespace {

constexpr uint32_t kImageMagic = 0x00000803;
constexpr uint32_t kLabelMagic = 0x00000801;

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

uint32_t be32(const std::vector<uint8_t>& buf, size_t off,
              const std::string& path) {
  if (buf.size() < off + 4) throw std::runtime_error(path + ": truncated header");
  return (uint32_t{buf[off]} << 24) | (uint32_t{buf[off + 1]} << 16) |
         (uint32_t{buf[off + 2]} << 8) | uint32_t{buf[off + 3]};
}

void put_be32(std::ofstream& out, uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

std::string hex(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::string split) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);
  const uint32_t im = be32(img, 0, images_path);
  if (im != kImageMagic) {
    throw std::runtime_error(images_path + ": magic mismatch (got " + hex(im) +
                             ", expected " + hex(kImageMagic) + ")");
  }
  const uint32_t lm = be32(lab, 0, labels_path);
  if (lm != kLabelMagic) {
    throw std::runtime_error(labels_path + ": magic mismatch (got " + hex(lm) +
                             ", expected " + hex(kLabelMagic) + ")");
  }
  const size_t n = be32(img, 4, images_path);
  const size_t h = be32(img, 8, images_path);
  const size_t w = be32(img, 12, images_path);
  const size_t nl = be32(lab, 4, labels_path);
  if (n != nl) {
    throw std::runtime_error(images_path + " holds " + std::to_string(n) +
                             " images but " + labels_path + " holds " +
                             std::to_string(nl) + " labels");
  }
  if (n == 0 || h == 0 || w == 0) {
    throw std::runtime_error(images_path + ": empty dimensions");
  }
  if (img.size() < 16 + n * h * w) {
    throw std::runtime_error(images_path + ": truncated pixel data");
  }
  if (lab.size() < 8 + n) {
    throw std::runtime_error(labels_path + ": truncated label data");
  }
  Dataset ds;
  ds.split = std::move(split);
  ds.images = Tensor({n, 1, h, w});
  for (size_t k = 0; k < n * h * w; ++k) {
    ds.images[k] = static_cast<float>(img[16 + k]) / 255.0f;
  }
  ds.labels.resize(n);
  for (size_t k = 0; k < n; ++k) {
    const int y = lab[8 + k];
    if (y > 9) {
      throw std::runtime_error(labels_path + ": label " + std::to_string(y) +
                               " at index " + std::to_string(k) +
                               " outside [0, 9]");
    }
    ds.labels[k] = y;
  }
  return ds;
}

void write_idx(const std::string& images_path, const std::string& labels_path,
               const Dataset& ds) {
  const Shape& s = ds.images.shape();
  if (s.size() != 4 || s[1] != 1 || s[0] != ds.size()) {
    throw std::invalid_argument("dataset images must be (N, 1, H, W)");
  }
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw std::runtime_error("cannot write IDX output");
  put_be32(img, kImageMagic);
  put_be32(img, static_cast<uint32_t>(s[0]));
  put_be32(img, static_cast<uint32_t>(s[2]));
  put_be32(img, static_cast<uint32_t>(s[3]));
  for (float v : ds.images.values()) {
    const long q = std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f);
    img.put(static_cast<char>(q));
  }
  put_be32(lab, kLabelMagic);
  put_be32(lab, static_cast<uint32_t>(ds.size()));
  for (int y : ds.labels) lab.put(static_cast<char>(y));
}

Dataset load_mnist_split(const std::string& dir, bool train) {
  const std::string prefix = dir + "/" + (train ? "train" : "t10k");
  return load_idx(prefix + "-images-idx3-ubyte", prefix + "-labels-idx1-ubyte",
                  train ? "train" : "test");
}

namespace {

Dataset pick(const Dataset& ds, std::span<const size_t> idx) {
  const Shape& s = ds.images.shape();
  const size_t per = s[1] * s[2] * s[3];
  Dataset out;
  out.split = ds.split;
  out.images = Tensor({idx.size(), s[1], s[2], s[3]});
  out.labels.resize(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    std::copy_n(ds.images.data() + idx[k] * per, per,
                out.images.data() + k * per);
    out.labels[k] = ds.labels[idx[k]];
  }
  return out;
}

std::vector<size_t> draw_indices(size_t total, size_t n, uint32_t seed) {
  if (n > total) {
    throw std::invalid_argument("cannot draw " + std::to_string(n) +
                                " samples from " + std::to_string(total));
  }
  std::vector<size_t> perm(total);
  std::iota(perm.begin(), perm.end(), size_t{0});
  SeededGenerator gen(seed);
  for (size_t i = 0; i < n; ++i) {
    const size_t j = i + static_cast<size_t>(gen.next_u64() % (total - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(n);
  return perm;
}

}  // namespace

Dataset head(const Dataset& ds, size_t n) {
  if (n > ds.size()) {
    throw std::invalid_argument("subset larger than the dataset");
  }
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  return pick(ds, idx);
}

Dataset sample_without_replacement(const Dataset& ds, size_t n,
                                   uint32_t seed) {
  return pick(ds, draw_indices(ds.size(), n, seed));
}

void rotate_image(std::span<const float> src, size_t h, size_t w,
                  double angle_deg, std::span<float> dst) {
  if (src.size() != h * w || dst.size() != h * w) {
    throw std::invalid_argument("rotate_image size mismatch");
  }
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cy = (static_cast<double>(h) - 1) / 2;
  const double cx = (static_cast<double>(w) - 1) / 2;
  auto at = [&](long y, long x) -> double {
    if (y < 0 || x < 0 || y >= static_cast<long>(h) ||
        x >= static_cast<long>(w)) {
      return 0.0;
    }
    return src[static_cast<size_t>(y) * w + static_cast<size_t>(x)];
  };
  for (size_t y = 0; y < h; ++y) {
    for (size_t x = 0; x < w; ++x) {
      // Destination pixel -> source location under the inverse rotation.
      // Image rows grow downwards, so a counter-clockwise turn on screen
      // maps (dx, dy) through the transposed matrix.
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = c * dx - s * dy + cx;
      const double sy = s * dx + c * dy + cy;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const double ax = sx - fx, ay = sy - fy;
      const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
      const double v = (1 - ay) * ((1 - ax) * at(y0, x0) + ax * at(y0, x0 + 1)) +
                       ay * ((1 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1));
      dst[y * w + x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
}

Dataset make_rotated_subset(const Dataset& ds, size_t n, double angle_deg,
                            uint32_t seed) {
  Dataset out = sample_without_replacement(ds, n, seed);
  const Shape& s = out.images.shape();
  const size_t h = s[2], w = s[3], per = s[1] * h * w;
  std::vector<float> tmp(h * w);
  for (size_t k = 0; k < out.size(); ++k) {
    for (size_t ch = 0; ch < s[1]; ++ch) {
      float* img = out.images.data() + k * per + ch * h * w;
      rotate_image({img, h * w}, h, w, angle_deg, tmp);
      std::copy(tmp.begin(), tmp.end(), img);
    }
  }
  return out;
}

std::vector<std::vector<size_t>> batch_indices(size_t n, size_t batch,
                                               uint32_t shuffle_seed,
                                               bool drop_last) {
  if (batch == 0) throw std::invalid_argument("batch size must be positive");
  const std::vector<size_t> order = draw_indices(n, n, shuffle_seed);
  std::vector<std::vector<size_t>> out;
  for (size_t start = 0; start < n; start += batch) {
    const size_t end = std::min(n, start + batch);
    if (drop_last && end - start < batch) break;
    out.emplace_back(order.begin() + static_cast<ptrdiff_t>(start),
                     order.begin() + static_cast<ptrdiff_t>(end));
  }
  return out;
}

Batch gather(const Dataset& ds, std::span<const size_t> indices) {
  Dataset d = pick(ds, indices);
  return {std::move(d.images), std::move(d.labels)};
}

}  // namespace ezo
