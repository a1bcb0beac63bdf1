#pragma once

#include "hifreq/core/tensor.hpp"

namespace hifreq::nn {

template <typename T>
struct LossValue {
  double value = 0.0;
  BasicTensor<T> grad;  // d value / d prediction
};

/// sum(mask * (pred - target)^2) / sum(mask), and its gradient
/// 2 * mask * (pred - target) / sum(mask). Throws EmptyMask.
template <typename T>
LossValue<T> masked_mse(const BasicTensor<T>& pred, const BasicTensor<T>& target, const BasicTensor<T>& mask);

}  // namespace hifreq::nn
