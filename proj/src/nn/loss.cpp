#include "hifreq/nn/loss.hpp"

#include "hifreq/core/error.hpp"

namespace hifreq::nn {

template <typename T>
LossValue<T> masked_mse(const BasicTensor<T>& pred, const BasicTensor<T>& target, const BasicTensor<T>& mask) {
  if (!pred.same_shape(target) || !pred.same_shape(mask)) fail(ErrorCode::ShapeMismatch, "masked_mse: shapes differ");
  double weight = 0.0;
  for (T m : mask.values()) weight += m;
  if (weight <= 0.0) fail(ErrorCode::EmptyMask, "masked_mse: mask is empty");
  LossValue<T> out;
  out.grad = BasicTensor<T>(pred.shape(), T{0});
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask[i] == T{0}) continue;
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    sum += static_cast<double>(mask[i]) * d * d;
    out.grad[i] = static_cast<T>(2.0 * static_cast<double>(mask[i]) * d / weight);
  }
  out.value = sum / weight;
  return out;
}

template LossValue<float> masked_mse(const BasicTensor<float>&, const BasicTensor<float>&, const BasicTensor<float>&);
template LossValue<double> masked_mse(const BasicTensor<double>&, const BasicTensor<double>&,
                                      const BasicTensor<double>&);

}  // namespace hifreq::nn
