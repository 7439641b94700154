#include "urlnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "urlnet/error.hpp"

namespace urlnet {

std::int64_t shape_size(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw DataError("negative tensor dimension");
    n *= d;
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, Scalar fill)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_size(shape_)), fill) {}

Tensor::Tensor(Shape shape, std::vector<Scalar> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (static_cast<std::int64_t>(data_.size()) != shape_size(shape_)) {
    throw DataError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                    shape_string(shape_));
  }
}

Scalar Tensor::item() const {
  if (data_.size() != 1) throw DataError("item() on tensor of shape " + shape_string(shape_));
  return data_[0];
}

std::span<Scalar> Tensor::ensure_grad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), Scalar(0));
  return grad_;
}

std::span<Scalar> Tensor::grad() {
  if (grad_.size() != data_.size()) throw DataError("tensor has no gradient");
  return grad_;
}

std::span<const Scalar> Tensor::grad() const {
  if (grad_.size() != data_.size()) throw DataError("tensor has no gradient");
  return grad_;
}

void Tensor::zero_grad() {
  if (grad_.size() == data_.size()) std::fill(grad_.begin(), grad_.end(), Scalar(0));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != static_cast<std::int64_t>(data_.size())) {
    throw DataError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Scalar v) { return std::isfinite(v); });
}

}  // namespace urlnet
