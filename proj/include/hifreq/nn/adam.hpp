#pragma once

#include <cstddef>

#include "hifreq/nn/unet.hpp"

namespace hifreq::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction; moment buffers mirror the model's parameters.
template <typename T>
class Adam {
 public:
  Adam(const UNet<T>& model, AdamConfig cfg);

  void step(UNet<T>& model, const UNet<T>& grads);

  std::size_t steps() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  UNet<T> m_;
  UNet<T> v_;
  std::size_t steps_ = 0;
};

}  // namespace hifreq::nn
