#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hifreq/core/depth_map.hpp"
#include "hifreq/core/rng.hpp"
#include "hifreq/core/tensor.hpp"
#include "hifreq/nn/adam.hpp"
#include "hifreq/nn/unet.hpp"
#include "hifreq/synth/synth.hpp"

namespace hifreq::train {

/// One rendered view with its measurements. `gt` may be empty at inference time.
struct Sample {
  std::string scene_id;
  Tensor shading;  // [H x W]
  DepthMap lowfreq;
  Tensor pattern;  // [H x W]
  DepthMap gt;
  std::optional<synth::SceneSpec> scene;

  std::size_t height() const { return shading.dim(0); }
  std::size_t width() const { return shading.dim(1); }
};

/// How channel 0 is normalized.
enum class ShadingNorm { Max, Standardize };

/// Units of the regression target: millimeters, or millimeters divided by the
/// sample's low-frequency depth standard deviation.
enum class ResidualScale { Millimeters, LowfreqSigma };

struct InputConfig {
  ShadingNorm shading_norm = ShadingNorm::Max;
  ResidualScale residual = ResidualScale::Millimeters;

  friend bool operator==(const InputConfig&, const InputConfig&) = default;
};

/// Network-ready tensors of one sample (or one patch of it).
struct NetInput {
  Tensor x;     // [3 x H x W]: shading, standardized low-frequency depth, pattern
  Tensor y;     // [1 x H x W] residual target on the mask; empty without ground truth
  Tensor mask;  // [1 x H x W]
  double depth_mean = 0.0;
  double depth_sigma = 1.0;
  std::string scene_id;

  std::size_t height() const { return x.dim(1); }
  std::size_t width() const { return x.dim(2); }
};

/// Channel 0 = shading / max (or standardized over the mask), channel 1 =
/// (lowfreq - mean) / sigma over the mask and 0 outside, channel 2 = pattern /
/// max; y = gt - lowfreq on the mask (divided by sigma in LowfreqSigma mode).
/// Throws DegenerateImage when max(shading) == 0 or sigma == 0.
NetInput make_input(const Sample& s, const InputConfig& cfg = {});

/// Non-overlapping patch x patch tiles; the tiling origin is drawn from `rng`
/// within the leftover margin. Tiles with less than `min_coverage` of their
/// pixels masked are dropped. Throws PatchTooLarge.
std::vector<NetInput> extract_patches(const NetInput& in, std::size_t patch, Rng& rng, double min_coverage = 0.5);

struct LumRange {
  double min = 0.5;
  double max = 1.5;

  friend bool operator==(const LumRange&, const LumRange&) = default;
};

/// Scales channels 0 and 2 by one factor; returns the factor used.
double augment_luminance(Tensor& x, Rng& rng, LumRange range = {});
void scale_luminance(Tensor& x, double factor);

struct TrainConfig {
  std::size_t epochs = 400;
  double lr = 1e-3;
  std::size_t batch = 8;
  std::size_t patch = 120;
  double val_fraction = 0.3;
  LumRange lum_aug{0.5, 1.5};
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t base_width = 32;
  double min_patch_coverage = 0.5;
  InputConfig input;

  nn::AdamConfig adam() const { return {lr, beta1, beta2, eps}; }
  nn::UNetArch arch() const { return {3, base_width, 3}; }
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainRecord {
  std::vector<double> train_loss;  // per epoch, mean of batch losses
  std::vector<double> val_loss;    // per epoch, masked MSE over all validation patches
  std::size_t best_epoch = 0;      // 1-based; 0 when no epoch ran
  double best_val_loss = 0.0;
  std::filesystem::path checkpoint;
};

/// Writes "epoch,train_loss,val_loss" rows.
void write_record_csv(std::ostream& os, const TrainRecord& record);

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> val;
};

/// Whole-scene split: round(n * val_fraction) scenes go to validation.
Dataset split_by_scene(std::vector<Sample> samples, double val_fraction, Rng& rng);

/// Tensors the trainer consumes; built once per run.
struct PatchSet {
  std::vector<NetInput> patches;
};
PatchSet make_patches(const std::vector<Sample>& samples, const TrainConfig& cfg, Rng& rng);

/// Masked MSE over every pixel of every patch (64-bit accumulation).
double evaluate_loss(const nn::UNet<float>& model, const PatchSet& set, std::size_t batch = 8);

using EpochCallback = std::function<void(std::size_t epoch, double train_loss, double val_loss)>;

/// Adam over shuffled, luminance-augmented patches. Writes the weights with the
/// lowest validation loss (first on ties) to `checkpoint` and leaves `model`
/// holding them. Throws EmptyDataset.
TrainRecord train(nn::UNet<float>& model, const Dataset& data, const TrainConfig& cfg,
                  const std::filesystem::path& checkpoint, const EpochCallback& on_epoch = {});

/// Same as `train`, starting from the checkpoint's weights. Throws ArchMismatch
/// if the checkpoint's architecture is not cfg.arch().
TrainRecord finetune(const std::filesystem::path& source_checkpoint, const Dataset& target, const TrainConfig& cfg,
                     const std::filesystem::path& checkpoint, nn::UNet<float>* out_model = nullptr,
                     const EpochCallback& on_epoch = {});

/// lowfreq + residual, where the residual is the network output (times the
/// sample's low-frequency sigma in LowfreqSigma mode). Mask copied from lowfreq.
/// Throws BadSize if H or W is not a multiple of 8.
DepthMap infer(const nn::UNet<float>& model, const Sample& s, const InputConfig& cfg = {});

/// Stacks patches [i0, i1) of `order` into [B x C x H x W] float tensors.
struct Batch {
  TensorF x;
  TensorF y;
  TensorF mask;
};
Batch make_batch(const PatchSet& set, const std::vector<std::size_t>& order, std::size_t i0, std::size_t i1);

}  // namespace hifreq::train
