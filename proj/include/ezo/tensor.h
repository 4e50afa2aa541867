// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EZO_TENSOR_H_
#define EZO_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ezo {

using Shape = std::vector<size_t>;

size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major FP32 array.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t dim(size_t i) const { return shape_.at(i); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  size_t bytes() const { return data_.size() * sizeof(float); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  float& operator[](size_t i) { return data_[i]; }
  float operator[](size_t i) const { return data_[i]; }

  // Same data, new shape of equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  bool all_finite() const;
  // Throws std::domain_error naming `where` if any value is NaN or Inf.
  void check_finite(const char* where) const;

 private:
  Shape shape_;
  std::vector<float> data_;
};

}  // namespace ezo

#endif  // EZO_TENSOR_H_
