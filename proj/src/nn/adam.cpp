#include "hifreq/nn/adam.hpp"

#include <cmath>

namespace hifreq::nn {

template <typename T>
Adam<T>::Adam(const UNet<T>& model, AdamConfig cfg) : cfg_(cfg), m_(model.arch()), v_(model.arch()) {}

template <typename T>
void Adam<T>::step(UNet<T>& model, const UNet<T>& grads) {
  ++steps_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  const T b1 = static_cast<T>(cfg_.beta1);
  const T b2 = static_cast<T>(cfg_.beta2);
  const T step = static_cast<T>(cfg_.lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(cfg_.eps);
  auto params = model.parameters();
  auto g = grads.parameters();
  auto m = m_.parameters();
  auto v = v_.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    T* w = params[p].tensor->data();
    const T* gp = g[p].tensor->data();
    T* mp = m[p].tensor->data();
    T* vp = v[p].tensor->data();
    for (std::size_t i = 0, n = params[p].tensor->size(); i < n; ++i) {
      mp[i] = b1 * mp[i] + (T{1} - b1) * gp[i];
      vp[i] = b2 * vp[i] + (T{1} - b2) * gp[i] * gp[i];
      w[i] -= step * mp[i] / (std::sqrt(vp[i] * inv_c2) + eps);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace hifreq::nn
