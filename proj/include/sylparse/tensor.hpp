#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sylparse/errors.hpp"

namespace sylparse {

// Dense row-major tensor of doubles. Rank 1 (vector) and rank 2 (matrix)
// are the only ranks the model needs; scalars are vectors of length 1.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
      : shape_(std::move(shape)) {
    check_shape();
    data_.assign(product(shape_), fill);
  }

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (product(shape_) != data_.size()) {
      throw ShapeError("tensor: shape " + shape_string() + " does not match " +
                       std::to_string(data_.size()) + " values");
    }
  }

  static Tensor vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }

  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * cols(), cols()); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols(), cols());
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (double x : data_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  void fill(double value) { std::fill(data_.begin(), data_.end(), value); }

  std::string shape_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) out += "x";
      out += std::to_string(shape_[i]);
    }
    return out + "]";
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t product(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  void check_shape() const {
    if (shape_.empty() || shape_.size() > 2) {
      throw ShapeError("tensor: rank must be 1 or 2, got " + std::to_string(shape_.size()));
    }
    for (std::size_t d : shape_) {
      if (d == 0) throw ShapeError("tensor: zero dimension in shape " + shape_string());
    }
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace sylparse
