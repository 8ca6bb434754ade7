#include "bhs/ad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "bhs/error.hpp"

namespace bhs::ad {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) {
      s += "x";
    }
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw Error(Errc::kShapeMismatch, "tensor of shape " + shape_string(shape_) + " given " +
                                          std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw Error(Errc::kShapeMismatch, "index rank " + std::to_string(index.size()) +
                                          " for tensor " + shape_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) {
      throw Error(Errc::kIndexOutOfRange,
                  "index " + std::to_string(i) + " on axis " + std::to_string(axis));
    }
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(index)];
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw Error(Errc::kShapeMismatch, "item() on tensor " + shape_string(shape_));
  }
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw Error(Errc::kShapeMismatch,
                "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

MatMap as_matrix(Tensor& t, std::size_t rows) {
  const auto r = static_cast<Eigen::Index>(rows);
  return MatMap(t.data(), r, rows == 0 ? 0 : static_cast<Eigen::Index>(t.size() / rows));
}

ConstMatMap as_matrix(const Tensor& t, std::size_t rows) {
  const auto r = static_cast<Eigen::Index>(rows);
  return ConstMatMap(t.data(), r, rows == 0 ? 0 : static_cast<Eigen::Index>(t.size() / rows));
}

MatMap as_rows(Tensor& t) {
  const std::size_t cols = t.rank() == 0 ? 1 : t.shape().back();
  return as_matrix(t, cols == 0 ? 0 : t.size() / cols);
}

ConstMatMap as_rows(const Tensor& t) {
  const std::size_t cols = t.rank() == 0 ? 1 : t.shape().back();
  return as_matrix(t, cols == 0 ? 0 : t.size() / cols);
}

}  // namespace bhs::ad
