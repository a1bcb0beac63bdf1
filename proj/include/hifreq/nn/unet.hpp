#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hifreq/core/rng.hpp"
#include "hifreq/core/tensor.hpp"
#include "hifreq/nn/layers.hpp"

namespace hifreq::nn {

/// U-Net family: `levels` encoder stages of two 3x3 conv+ReLU and a 2x2
/// max-pool, a two-conv bottleneck, mirrored decoder stages (3x3 stride-2
/// transposed conv, skip concatenation, two 3x3 conv+ReLU) and a 1x1 head.
/// Widths double per level starting from `base_width`.
struct UNetArch {
  std::size_t in_channels = 3;
  std::size_t base_width = 32;
  std::size_t levels = 3;

  std::size_t width(std::size_t level) const { return base_width << level; }
  std::size_t size_multiple() const { return std::size_t{1} << levels; }

  friend bool operator==(const UNetArch&, const UNetArch&) = default;
};

/// Closed-form parameter count of an architecture.
std::size_t parameter_count(const UNetArch& arch);

/// Parameter names in checkpoint order.
std::vector<std::string> parameter_manifest(const UNetArch& arch);

template <typename T>
class UNet {
 public:
  struct ParamRef {
    std::string name;
    BasicTensor<T>* tensor;
  };
  struct ConstParamRef {
    std::string name;
    const BasicTensor<T>* tensor;
  };

  /// All weights and biases zero.
  explicit UNet(UNetArch arch = {});

  const UNetArch& arch() const { return arch_; }

  /// He-uniform kernels, zero biases, drawn in manifest order.
  void init(Rng& rng);

  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;
  std::size_t parameter_count() const;

  template <typename U>
  UNet<U> cast() const {
    UNet<U> out(arch_);
    auto dst = out.parameters();
    auto src = parameters();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i].tensor = src[i].tensor->template cast<U>();
    return out;
  }

  std::vector<ConvLayer<T>> encoder;     // 2 per level
  std::vector<ConvLayer<T>> bottleneck;  // 2
  std::vector<UpConvLayer<T>> up;        // 1 per level, index = level
  std::vector<ConvLayer<T>> decoder;     // 2 per level
  ConvLayer<T> head;

 private:
  UNetArch arch_;
};

/// Activations kept by the training forward pass.
template <typename T>
struct UNetCache {
  BasicTensor<T> input;
  std::vector<BasicTensor<T>> enc_in;       // per level: input of the first conv
  std::vector<BasicTensor<T>> enc_a;        // per level: first conv+ReLU output
  std::vector<BasicTensor<T>> skip;         // per level: second conv+ReLU output
  std::vector<std::vector<std::uint32_t>> pool_argmax;
  BasicTensor<T> mid_in, mid_a, mid_b;
  std::vector<BasicTensor<T>> up_in;        // per level: upconv input
  std::vector<BasicTensor<T>> dec_in;       // per level: concat output
  std::vector<BasicTensor<T>> dec_a;        // per level: first decoder conv+ReLU
  std::vector<BasicTensor<T>> dec_b;        // per level: second decoder conv+ReLU
};

/// [B x in_channels x H x W] -> [B x 1 x H x W]; H and W must be multiples of
/// 2^levels (BadSize). Releases intermediates as soon as they are consumed.
template <typename T>
BasicTensor<T> unet_forward(const UNet<T>& model, const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> unet_forward(const UNet<T>& model, const BasicTensor<T>& input, UNetCache<T>& cache);

/// Gradient of the loss w.r.t. every parameter, packed in a model-shaped container.
template <typename T>
UNet<T> unet_backward(const UNet<T>& model, const UNetCache<T>& cache, const BasicTensor<T>& dy);

/// Weight file: "UNW1", then per parameter in manifest order: u32 name length,
/// name bytes, u32 rank, u32 dims, float32 values; all little-endian.
template <typename T>
void save_checkpoint(const UNet<T>& model, const std::filesystem::path& path);

/// Reads a checkpoint and rebuilds the architecture it describes.
UNet<float> load_checkpoint(const std::filesystem::path& path);

/// Loads into an existing model; throws ArchMismatch on any name/shape difference.
template <typename T>
void load_checkpoint_into(UNet<T>& model, const std::filesystem::path& path);

}  // namespace hifreq::nn
