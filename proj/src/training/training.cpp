#include "hifreq/training/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hifreq/core/error.hpp"
#include "hifreq/nn/loss.hpp"

namespace hifreq::train {

namespace {

double max_value(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, v);
  return m;
}

}  // namespace

NetInput make_input(const Sample& s, const InputConfig& cfg) {
  const std::size_t H = s.shading.dim(0);
  const std::size_t W = s.shading.dim(1);
  if (s.pattern.shape() != s.shading.shape() || s.lowfreq.depth.shape() != s.shading.shape()) {
    fail(ErrorCode::ShapeMismatch, "sample images disagree in size");
  }
  const bool has_gt = !s.gt.depth.empty();
  if (has_gt && (s.gt.depth.shape() != s.shading.shape())) fail(ErrorCode::ShapeMismatch, "ground truth size differs");

  const Tensor& mask = s.lowfreq.mask;
  const MaskedStats depth = masked_stats(s.lowfreq.depth, mask);
  if (depth.count == 0) fail(ErrorCode::EmptyMask, "sample has no valid low-frequency depth");
  if (!(depth.stddev > 0.0)) fail(ErrorCode::DegenerateImage, "low-frequency depth is constant (sigma == 0)");

  NetInput in;
  in.scene_id = s.scene_id;
  in.depth_mean = depth.mean;
  in.depth_sigma = depth.stddev;
  in.x = Tensor({3, H, W}, 0.0);
  in.mask = Tensor({1, H, W}, 0.0);
  const std::size_t HW = H * W;

  if (cfg.shading_norm == ShadingNorm::Max) {
    const double smax = max_value(s.shading);
    if (!(smax > 0.0)) fail(ErrorCode::DegenerateImage, "shading image is all zero");
    for (std::size_t i = 0; i < HW; ++i) in.x[i] = s.shading[i] / smax;
  } else {
    const MaskedStats sh = masked_stats(s.shading, mask);
    if (!(sh.stddev > 0.0)) fail(ErrorCode::DegenerateImage, "shading image is constant");
    for (std::size_t i = 0; i < HW; ++i) in.x[i] = mask[i] != 0.0 ? (s.shading[i] - sh.mean) / sh.stddev : 0.0;
  }
  const double pmax = max_value(s.pattern);
  for (std::size_t i = 0; i < HW; ++i) {
    in.mask[i] = mask[i] != 0.0 ? 1.0 : 0.0;
    if (mask[i] != 0.0) in.x[HW + i] = (s.lowfreq.depth[i] - depth.mean) / depth.stddev;
    in.x[2 * HW + i] = pmax > 0.0 ? s.pattern[i] / pmax : 0.0;
  }

  if (has_gt) {
    const double scale = cfg.residual == ResidualScale::LowfreqSigma ? 1.0 / depth.stddev : 1.0;
    in.y = Tensor({1, H, W}, 0.0);
    for (std::size_t i = 0; i < HW; ++i) {
      if (mask[i] != 0.0) in.y[i] = (s.gt.depth[i] - s.lowfreq.depth[i]) * scale;
    }
  }
  require_finite(in.x, "network input");
  return in;
}

std::vector<NetInput> extract_patches(const NetInput& in, std::size_t patch, Rng& rng, double min_coverage) {
  const std::size_t H = in.height();
  const std::size_t W = in.width();
  if (patch == 0 || patch > H || patch > W) fail(ErrorCode::PatchTooLarge, "patch larger than the image");
  const std::size_t oy = rng.uniform_index(H % patch + 1);
  const std::size_t ox = rng.uniform_index(W % patch + 1);
  const std::size_t C = in.x.dim(0);
  std::vector<NetInput> out;
  for (std::size_t r0 = oy; r0 + patch <= H; r0 += patch) {
    for (std::size_t c0 = ox; c0 + patch <= W; c0 += patch) {
      std::size_t covered = 0;
      for (std::size_t r = 0; r < patch; ++r) {
        for (std::size_t c = 0; c < patch; ++c) covered += in.mask(0, r0 + r, c0 + c) != 0.0;
      }
      if (static_cast<double>(covered) < min_coverage * static_cast<double>(patch * patch)) continue;
      NetInput p;
      p.scene_id = in.scene_id;
      p.depth_mean = in.depth_mean;
      p.depth_sigma = in.depth_sigma;
      p.x = Tensor({C, patch, patch}, 0.0);
      p.mask = Tensor({1, patch, patch}, 0.0);
      if (!in.y.empty()) p.y = Tensor({1, patch, patch}, 0.0);
      for (std::size_t r = 0; r < patch; ++r) {
        for (std::size_t c = 0; c < patch; ++c) {
          for (std::size_t ch = 0; ch < C; ++ch) p.x(ch, r, c) = in.x(ch, r0 + r, c0 + c);
          p.mask(0, r, c) = in.mask(0, r0 + r, c0 + c);
          if (!in.y.empty()) p.y(0, r, c) = in.y(0, r0 + r, c0 + c);
        }
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

void scale_luminance(Tensor& x, double factor) {
  const std::size_t plane = x.dim(1) * x.dim(2);
  for (std::size_t i = 0; i < plane; ++i) {
    x[i] *= factor;
    x[2 * plane + i] *= factor;
  }
}

double augment_luminance(Tensor& x, Rng& rng, LumRange range) {
  if (!(range.min <= range.max) || range.min <= 0.0) fail(ErrorCode::EmptyRange, "invalid luminance range");
  const double s = rng.uniform(range.min, range.max);
  scale_luminance(x, s);
  return s;
}

void TrainConfig::validate() const {
  if (patch == 0 || patch % 8 != 0) fail(ErrorCode::BadSize, "patch size must be a positive multiple of 8");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail(ErrorCode::InvalidArgument, "val_fraction must lie in (0, 1)");
  if (batch == 0) fail(ErrorCode::InvalidArgument, "batch must be >= 1");
  if (lr < 0.0) fail(ErrorCode::InvalidArgument, "learning rate must be non-negative");
  if (!(lum_aug.min <= lum_aug.max) || lum_aug.min <= 0.0) fail(ErrorCode::EmptyRange, "invalid luminance range");
}

void write_record_csv(std::ostream& os, const TrainRecord& record) {
  os << "epoch,train_loss,val_loss\n";
  char line[96];
  for (std::size_t e = 0; e < record.train_loss.size(); ++e) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g\n", e + 1, record.train_loss[e], record.val_loss[e]);
    os << line;
  }
}

Dataset split_by_scene(std::vector<Sample> samples, double val_fraction, Rng& rng) {
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(samples.size())));
  std::vector<bool> is_val(samples.size(), false);
  for (std::size_t i = 0; i < n_val && i < order.size(); ++i) is_val[order[i]] = true;
  Dataset d;
  for (std::size_t i = 0; i < samples.size(); ++i) (is_val[i] ? d.val : d.train).push_back(std::move(samples[i]));
  return d;
}

PatchSet make_patches(const std::vector<Sample>& samples, const TrainConfig& cfg, Rng& rng) {
  PatchSet set;
  for (const Sample& s : samples) {
    NetInput in = make_input(s, cfg.input);
    for (NetInput& p : extract_patches(in, cfg.patch, rng, cfg.min_patch_coverage)) set.patches.push_back(std::move(p));
  }
  return set;
}

Batch make_batch(const PatchSet& set, const std::vector<std::size_t>& order, std::size_t i0, std::size_t i1) {
  const NetInput& first = set.patches[order[i0]];
  const std::size_t B = i1 - i0, C = first.x.dim(0), H = first.height(), W = first.width();
  Batch b{TensorF({B, C, H, W}), TensorF({B, 1, H, W}), TensorF({B, 1, H, W})};
  for (std::size_t k = 0; k < B; ++k) {
    const NetInput& p = set.patches[order[i0 + k]];
    std::transform(p.x.data(), p.x.data() + p.x.size(), b.x.data() + k * C * H * W,
                   [](double v) { return static_cast<float>(v); });
    std::transform(p.y.data(), p.y.data() + p.y.size(), b.y.data() + k * H * W,
                   [](double v) { return static_cast<float>(v); });
    std::transform(p.mask.data(), p.mask.data() + p.mask.size(), b.mask.data() + k * H * W,
                   [](double v) { return static_cast<float>(v); });
  }
  return b;
}

double evaluate_loss(const nn::UNet<float>& model, const PatchSet& set, std::size_t batch) {
  std::vector<std::size_t> order(set.patches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  double sum = 0.0, weight = 0.0;
  for (std::size_t i0 = 0; i0 < order.size(); i0 += batch) {
    const std::size_t i1 = std::min(order.size(), i0 + batch);
    const Batch b = make_batch(set, order, i0, i1);
    const TensorF pred = nn::unet_forward(model, b.x);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (b.mask[i] == 0.0f) continue;
      const double d = static_cast<double>(pred[i]) - static_cast<double>(b.y[i]);
      sum += d * d;
      weight += 1.0;
    }
  }
  if (weight == 0.0) fail(ErrorCode::EmptyMask, "evaluate_loss: no masked pixels");
  return sum / weight;
}

TrainRecord train(nn::UNet<float>& model, const Dataset& data, const TrainConfig& cfg,
                  const std::filesystem::path& checkpoint, const EpochCallback& on_epoch) {
  cfg.validate();
  if (model.arch() != cfg.arch()) fail(ErrorCode::ArchMismatch, "model architecture differs from the training config");
  Rng rng(cfg.seed);
  Rng patch_rng = rng.fork(1);
  const PatchSet train_set = make_patches(data.train, cfg, patch_rng);
  const PatchSet val_set = make_patches(data.val, cfg, patch_rng);
  if (train_set.patches.empty()) fail(ErrorCode::EmptyDataset, "no training patches after patching");
  // Without validation patches the training loss drives model selection.
  const bool has_val = !val_set.patches.empty();

  TrainRecord record;
  record.checkpoint = checkpoint;
  nn::UNet<float> best = model;
  record.best_val_loss = has_val ? evaluate_loss(model, val_set, cfg.batch) : 0.0;
  if (!checkpoint.empty()) nn::save_checkpoint(model, checkpoint);

  nn::Adam<float> adam(model, cfg.adam());
  Rng order_rng = rng.fork(2);
  Rng aug_rng = rng.fork(3);
  std::vector<std::size_t> order(train_set.patches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  nn::UNetCache<float> cache;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t i0 = 0; i0 < order.size(); i0 += cfg.batch) {
      const std::size_t i1 = std::min(order.size(), i0 + cfg.batch);
      Batch b = make_batch(train_set, order, i0, i1);
      const std::size_t plane = b.x.dim(2) * b.x.dim(3);
      for (std::size_t k = 0; k < i1 - i0; ++k) {
        const auto s = static_cast<float>(aug_rng.uniform(cfg.lum_aug.min, cfg.lum_aug.max));
        float* x = b.x.data() + k * b.x.dim(1) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          x[i] *= s;
          x[2 * plane + i] *= s;
        }
      }
      const TensorF pred = nn::unet_forward(model, b.x, cache);
      const nn::LossValue<float> loss = nn::masked_mse(pred, b.y, b.mask);
      const nn::UNet<float> grads = nn::unet_backward(model, cache, loss.grad);
      adam.step(model, grads);
      loss_sum += loss.value;
      ++batches;
    }
    const double train_loss = loss_sum / static_cast<double>(batches);
    const double val_loss = has_val ? evaluate_loss(model, val_set, cfg.batch) : train_loss;
    record.train_loss.push_back(train_loss);
    record.val_loss.push_back(val_loss);
    if (record.best_epoch == 0 || val_loss < record.best_val_loss) {
      record.best_epoch = epoch;
      record.best_val_loss = val_loss;
      best = model;
      if (!checkpoint.empty()) nn::save_checkpoint(model, checkpoint);
    }
    if (on_epoch) on_epoch(epoch, train_loss, val_loss);
  }
  model = std::move(best);
  return record;
}

TrainRecord finetune(const std::filesystem::path& source_checkpoint, const Dataset& target, const TrainConfig& cfg,
                     const std::filesystem::path& checkpoint, nn::UNet<float>* out_model,
                     const EpochCallback& on_epoch) {
  nn::UNet<float> model(cfg.arch());
  nn::load_checkpoint_into(model, source_checkpoint);
  TrainRecord record = train(model, target, cfg, checkpoint, on_epoch);
  if (out_model) *out_model = std::move(model);
  return record;
}

DepthMap infer(const nn::UNet<float>& model, const Sample& s, const InputConfig& cfg) {
  const std::size_t H = s.height();
  const std::size_t W = s.width();
  if (H % 8 || W % 8) fail(ErrorCode::BadSize, "inference needs height and width divisible by 8");
  Sample no_gt = s;
  no_gt.gt = DepthMap();
  const NetInput in = make_input(no_gt, cfg);
  TensorF x({1, 3, H, W});
  std::transform(in.x.data(), in.x.data() + in.x.size(), x.data(), [](double v) { return static_cast<float>(v); });
  const TensorF residual = nn::unet_forward(model, x);
  const double scale = cfg.residual == ResidualScale::LowfreqSigma ? in.depth_sigma : 1.0;
  DepthMap out = s.lowfreq;
  for (std::size_t i = 0; i < H * W; ++i) {
    if (out.mask[i] != 0.0) out.depth[i] += scale * static_cast<double>(residual[i]);
  }
  require_finite(out.depth, "inferred depth");
  return out;
}

}  // namespace hifreq::train
