#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hifreq/core/rng.hpp"
#include "hifreq/core/tensor.hpp"

namespace hifreq::nn {

// Activations are [B x C x H x W] row-major tensors throughout.

/// Stride-1 convolution with zero "same" padding (kernel size odd).
template <typename T>
struct ConvLayer {
  BasicTensor<T> kernels;  // [Cout x Cin x k x k]
  BasicTensor<T> bias;     // [Cout]

  ConvLayer() = default;
  ConvLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel = 3)
      : kernels({out_channels, in_channels, kernel, kernel}, T{0}), bias({out_channels}, T{0}) {}

  std::size_t in_channels() const { return kernels.dim(1); }
  std::size_t out_channels() const { return kernels.dim(0); }
  std::size_t kernel() const { return kernels.dim(2); }
};

/// 3x3 transposed convolution, stride 2, padding 1, output padding 1: H x W -> 2H x 2W.
template <typename T>
struct UpConvLayer {
  BasicTensor<T> kernels;  // [Cin x Cout x 3 x 3]
  BasicTensor<T> bias;     // [Cout]

  UpConvLayer() = default;
  UpConvLayer(std::size_t in_channels, std::size_t out_channels)
      : kernels({in_channels, out_channels, 3, 3}, T{0}), bias({out_channels}, T{0}) {}

  std::size_t in_channels() const { return kernels.dim(0); }
  std::size_t out_channels() const { return kernels.dim(1); }
};

template <typename T>
struct ConvGrads {
  BasicTensor<T> dx;  // empty when not requested
  BasicTensor<T> dkernels;
  BasicTensor<T> dbias;
};

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const ConvLayer<T>& layer);

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& x, const ConvLayer<T>& layer, const BasicTensor<T>& dy,
                             bool need_dx = true);

template <typename T>
BasicTensor<T> upconv2_forward(const BasicTensor<T>& x, const UpConvLayer<T>& layer);

template <typename T>
ConvGrads<T> upconv2_backward(const BasicTensor<T>& x, const UpConvLayer<T>& layer, const BasicTensor<T>& dy);

/// 2x2 max pooling; `argmax` holds, per output element, the flat index into the
/// input's H x W plane. Ties go to the first element in row-major order.
template <typename T>
struct PoolResult {
  BasicTensor<T> y;
  std::vector<std::uint32_t> argmax;
};

template <typename T>
PoolResult<T> maxpool2_forward(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> maxpool2_backward(const BasicTensor<T>& dy, const std::vector<std::uint32_t>& argmax,
                                 const Shape& x_shape);

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x);

/// Gradient through ReLU given its output y (y > 0 exactly where x > 0).
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy);

template <typename T>
BasicTensor<T> concat_forward(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> concat_backward(const BasicTensor<T>& dy, std::size_t channels_a);

/// He-uniform: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)), biases zero.
template <typename T>
void init_he_uniform(ConvLayer<T>& layer, Rng& rng);
template <typename T>
void init_he_uniform(UpConvLayer<T>& layer, Rng& rng);

}  // namespace hifreq::nn
