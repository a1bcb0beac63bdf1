#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hifreq/core/error.hpp"

namespace hifreq {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape);

/// Dense row-major n-dimensional array.
///
/// A default-constructed tensor is the empty sentinel (rank 0, no data); any
/// tensor built from a shape has every dimension >= 1.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{}) : shape_(std::move(shape)) {
    for (std::size_t d : shape_) {
      if (d == 0) fail(ErrorCode::ZeroDim, "tensor dimension is zero in shape " + shape_string(shape_));
    }
    data_.assign(shape_size(shape_), fill);
  }

  BasicTensor(std::initializer_list<std::size_t> shape, T fill = T{})
      : BasicTensor(Shape(shape), fill) {}

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  template <typename... I>
  T& operator()(I... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... I>
  const T& operator()(I... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  T& at(std::span<const std::size_t> idx) { return data_.at(checked_offset(idx)); }
  const T& at(std::span<const std::size_t> idx) const { return data_.at(checked_offset(idx)); }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  /// Same data, new shape with equal element count.
  BasicTensor reshaped(Shape shape) const {
    if (shape_size(shape) != size()) {
      fail(ErrorCode::ShapeMismatch, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    BasicTensor out = *this;
    out.shape_ = std::move(shape);
    return out;
  }

  template <typename U>
  BasicTensor<U> cast() const {
    BasicTensor<U> out(shape_);
    std::transform(data_.begin(), data_.end(), out.data(), [](T v) { return static_cast<U>(v); });
    return out;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  bool same_shape(const BasicTensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    std::size_t off = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx) off = off * shape_[axis++] + i;
    return off;
  }

  std::size_t checked_offset(std::span<const std::size_t> idx) const {
    if (idx.size() != shape_.size()) fail(ErrorCode::ShapeMismatch, "index rank does not match tensor rank");
    std::size_t off = 0;
    for (std::size_t axis = 0; axis < idx.size(); ++axis) {
      if (idx[axis] >= shape_[axis]) fail(ErrorCode::InvalidArgument, "tensor index out of range");
      off = off * shape_[axis] + idx[axis];
    }
    return off;
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<double>;
using TensorF = BasicTensor<float>;

/// Tensor of the given shape with every element equal to `fill`; throws ZeroDim.
inline Tensor tensor_new(const Shape& shape, double fill) { return Tensor(shape, fill); }

/// Throws NonFinite if any element is NaN or infinite.
template <typename T>
void require_finite(const BasicTensor<T>& t, const char* what) {
  if (!t.all_finite()) fail(ErrorCode::NonFinite, std::string(what) + " contains non-finite values");
}

}  // namespace hifreq
