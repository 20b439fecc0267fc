#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrf/errors.hpp"

namespace lrf {

/// Dense row-major tensor of 64-bit floats. Shapes are lists of positive
/// extents; a scalar is represented as shape {1}. Values are plain data --
/// tensors carry no graph state (see Tape for differentiation).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape);
  Tensor(std::vector<std::int64_t> shape, std::vector<double> data);

  static Tensor full(std::vector<std::int64_t> shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t rank() const { return static_cast<std::int64_t>(shape_.size()); }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  std::int64_t extent(std::int64_t axis) const { return shape_[static_cast<std::size_t>(axis)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  // Rank-specific indexed access used by the hand-written kernels and tests.
  double& at(std::int64_t i, std::int64_t j);
  double at(std::int64_t i, std::int64_t j) const;
  double& at(std::int64_t c, std::int64_t h, std::int64_t w);
  double at(std::int64_t c, std::int64_t h, std::int64_t w) const;
  double& at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w);
  double at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  void fill(double value);

  std::string shape_str() const;  // e.g. "2x3x4"

  static std::int64_t shape_numel(const std::vector<std::int64_t>& shape);

 private:
  std::vector<std::int64_t> shape_;
  std::vector<double> data_;
};

/// Requires equal shapes, otherwise throws DimError naming both shapes.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace lrf
