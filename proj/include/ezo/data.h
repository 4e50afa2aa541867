// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// IDX image/label files, subsets, rotated subsets and seeded batch order.

#ifndef EZO_DATA_H_
#define EZO_DATA_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ezo/tensor.h"

namespace ezo {

struct Dataset {
  Tensor images;            // (N, 1, H, W), values in [0, 1]
  std::vector<int> labels;  // N entries in [0, 9]
  std::string split;

  size_t size() const { return labels.size(); }
};

struct Batch {
  Tensor x;
  std::vector<int> y;
};

// Parses big-endian IDX files (images magic 0x00000803, labels 0x00000801).
// Throws std::runtime_error naming the file on bad magic, inconsistent
// dimensions, out-of-range labels or truncation.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::string split = "");

// Writes pixels as round(v * 255).
void write_idx(const std::string& images_path, const std::string& labels_path,
               const Dataset& ds);

// Loads <dir>/{train,t10k}-{images-idx3,labels-idx1}-ubyte.
Dataset load_mnist_split(const std::string& dir, bool train);

// The first n samples.
Dataset head(const Dataset& ds, size_t n);
// n distinct samples chosen uniformly without replacement (seeded partial
// Fisher-Yates), kept in draw order.
Dataset sample_without_replacement(const Dataset& ds, size_t n, uint32_t seed);

// Rotates one H x W image counter-clockwise by angle_deg about its center:
// inverse mapping with bilinear interpolation and zero padding.
void rotate_image(std::span<const float> src, size_t h, size_t w,
                  double angle_deg, std::span<float> dst);

// n samples drawn as in sample_without_replacement, each rotated by angle_deg.
Dataset make_rotated_subset(const Dataset& ds, size_t n, double angle_deg,
                            uint32_t seed);

// Index lists of consecutive batches over a seeded shuffle of [0, n). The
// last short batch is kept unless drop_last.
std::vector<std::vector<size_t>> batch_indices(size_t n, size_t batch,
                                               uint32_t shuffle_seed,
                                               bool drop_last = false);

Batch gather(const Dataset& ds, std::span<const size_t> indices);

}  // namespace ezo

#endif  // EZO_DATA_H_
