#include "lrf/tensor.hpp"

#include <cmath>
#include <sstream>

namespace lrf {

std::int64_t Tensor::shape_numel(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t e : shape) {
    if (e <= 0) throw DimError("tensor extent must be positive, got " + std::to_string(e));
    n *= e;
  }
  return n;
}

Tensor::Tensor(std::vector<std::int64_t> shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), 0.0) {}

Tensor::Tensor(std::vector<std::int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != static_cast<std::int64_t>(data_.size())) {
    throw DimError("data length " + std::to_string(data_.size()) +
                   " does not match shape " + shape_str());
  }
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

double& Tensor::at(std::int64_t i, std::int64_t j) {
  return data_[static_cast<std::size_t>(i * shape_[1] + j)];
}
double Tensor::at(std::int64_t i, std::int64_t j) const {
  return data_[static_cast<std::size_t>(i * shape_[1] + j)];
}
double& Tensor::at(std::int64_t c, std::int64_t h, std::int64_t w) {
  return data_[static_cast<std::size_t>((c * shape_[1] + h) * shape_[2] + w)];
}
double Tensor::at(std::int64_t c, std::int64_t h, std::int64_t w) const {
  return data_[static_cast<std::size_t>((c * shape_[1] + h) * shape_[2] + w)];
}
double& Tensor::at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w) {
  return data_[static_cast<std::size_t>(((b * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
}
double Tensor::at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w) const {
  return data_[static_cast<std::size_t>(((b * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double value) {
  for (double& v : data_) v = value;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  if (shape_.empty()) os << "scalar";
  return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace lrf
