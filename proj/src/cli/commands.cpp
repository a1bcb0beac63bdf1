#include "hifreq/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>

#include "hifreq/cli/pipeline.hpp"
#include "hifreq/core/error.hpp"
#include "hifreq/core/parallel.hpp"
#include "hifreq/core/rng.hpp"
#include "hifreq/io/manifest.hpp"
#include "hifreq/nn/unet.hpp"

namespace hifreq::cli {

namespace fs = std::filesystem;

namespace {

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, path.string() + ": cannot open for writing");
  return os;
}

std::uint64_t dataset_seed(const ExperimentConfig& cfg, Domain domain) {
  return mix_seed(cfg.seed, domain == Domain::Synthetic ? 1 : 2);
}

const synth::SynthConfig& domain_synth(const ExperimentConfig& cfg, Domain domain) {
  return domain == Domain::Synthetic ? cfg.synth : cfg.target_synth;
}

// Training runs draw from a seed derived from both the experiment seed and the
// per-run seed so that --seed alone changes every stream.
train::TrainConfig run_config(const ExperimentConfig& cfg, const train::TrainConfig& base, std::uint64_t stream) {
  train::TrainConfig t = base;
  t.seed = mix_seed(mix_seed(cfg.seed, stream), base.seed);
  return t;
}

void write_record(const fs::path& dir, const std::string& stem, const train::TrainRecord& record) {
  std::ofstream os = open_out(dir / (stem + "_record.csv"));
  train::write_record_csv(os, record);
  if (!record.train_loss.empty()) io::write_png(dir / (stem + "_curve.png"), plot_losses(record));
}

train::Dataset manifest_dataset(const fs::path& manifest) {
  train::Dataset d;
  d.train = load_split(manifest, "train");
  d.val = load_split(manifest, "val");
  return d;
}

void log_epoch(std::ostream& log, std::size_t epoch, double train_loss, double val_loss) {
  char line[128];
  std::snprintf(line, sizeof line, "epoch %zu train %.6g val %.6g\n", epoch, train_loss, val_loss);
  log << line << std::flush;
}

}  // namespace

Domain parse_domain(const std::string& name) {
  if (name == "synthetic") return Domain::Synthetic;
  if (name == "target") return Domain::Target;
  fail(ErrorCode::ConfigError, "unknown domain '" + name + "' (expected synthetic or target)");
}

std::vector<std::string> assign_splits(std::size_t count, double test_fraction, double val_fraction, Rng& rng) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(count)));
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(count)));
  std::vector<std::string> split(count, "train");
  for (std::size_t k = 0; k < count; ++k) {
    if (k < n_test) {
      split[order[k]] = "test";
    } else if (k < n_test + n_val) {
      split[order[k]] = "val";
    }
  }
  return split;
}

GenResult cmd_gen(const ExperimentConfig& cfg, const fs::path& out_dir, Domain domain, std::ostream& log) {
  const std::size_t count = cfg.gen.count;
  if (count == 0) fail(ErrorCode::ConfigError, "gen.count must be >= 1");
  const double val_fraction = cfg.train.val_fraction;
  if (!(cfg.gen.test_fraction >= 0.0 && cfg.gen.test_fraction + val_fraction < 1.0)) {
    fail(ErrorCode::ConfigError, "test_fraction + val_fraction must be below 1");
  }
  synth::validate(domain_synth(cfg, domain));
  make_dirs(out_dir / "scenes");
  save_config(out_dir / "config.json", cfg);

  Rng split_rng(mix_seed(cfg.seed, domain == Domain::Synthetic ? 3 : 4));
  const std::vector<std::string> split = assign_splits(count, cfg.gen.test_fraction, val_fraction, split_rng);

  const std::string prefix = domain == Domain::Synthetic ? "s" : "t";
  const std::uint64_t base_seed = dataset_seed(cfg, domain);
  std::vector<std::optional<io::ManifestEntry>> entries(count);
  std::mutex log_mutex;
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "%s%04zu", prefix.c_str(), i);
      io::ManifestEntry e;
      e.scene_id = id;
      e.seed = scene_seed(base_seed, i);
      e.shading = fs::path("scenes") / (e.scene_id + "_shading.pfm");
      e.depth = fs::path("scenes") / (e.scene_id + "_depth.pfm");
      e.pattern = fs::path("scenes") / (e.scene_id + "_pattern.pfm");
      e.gt = fs::path("scenes") / (e.scene_id + "_gt.pfm");
      e.split = split[i];
      try {
        const train::Sample s = generate_scene(domain_synth(cfg, domain), cfg.rig, cfg.sparse, e.seed, e.scene_id);
        io::write_pfm(out_dir / e.shading, s.shading);
        io::write_depth_pfm(out_dir / e.depth, s.lowfreq);
        io::write_pfm(out_dir / e.pattern, s.pattern);
        io::write_depth_pfm(out_dir / e.gt, s.gt);
        entries[i] = std::move(e);
      } catch (const Error& err) {
        if (err.code() == ErrorCode::IoError) throw;
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "skipped " << id << ": " << err.what() << '\n';
      }
    }
  });

  GenResult result;
  result.manifest = out_dir / "manifest.jsonl";
  std::vector<io::ManifestEntry> written;
  for (auto& e : entries) {
    if (e) {
      written.push_back(std::move(*e));
    } else {
      ++result.skipped;
    }
  }
  result.generated = written.size();
  io::write_manifest(result.manifest, written);
  log << "generated " << result.generated << " scenes (" << result.skipped << " skipped) -> "
      << result.manifest.string() << '\n';
  return result;
}

std::vector<train::Sample> load_split(const fs::path& manifest, const std::string& split) {
  const fs::path root = manifest.parent_path();
  std::vector<train::Sample> out;
  for (const io::ManifestEntry& e : io::read_manifest(manifest)) {
    if (split.empty() || e.split == split) out.push_back(io::load_sample(root, e));
  }
  return out;
}

train::TrainRecord cmd_train(const ExperimentConfig& cfg, const fs::path& manifest, const fs::path& out_dir,
                             std::ostream& log) {
  const train::TrainConfig tc = run_config(cfg, cfg.train, 10);
  tc.validate();
  const train::Dataset data = manifest_dataset(manifest);
  make_dirs(out_dir);
  nn::UNet<float> model(tc.arch());
  Rng init_rng(mix_seed(tc.seed, 0x1417));
  model.init(init_rng);
  log << "training on " << data.train.size() << " scenes, validating on " << data.val.size() << '\n';
  const train::TrainRecord record =
      train::train(model, data, tc, out_dir / "model.unw",
                   [&](std::size_t e, double tl, double vl) { log_epoch(log, e, tl, vl); });
  write_record(out_dir, "train", record);
  log << "best epoch " << record.best_epoch << " val " << record.best_val_loss << '\n';
  return record;
}

train::TrainRecord cmd_finetune(const ExperimentConfig& cfg, const fs::path& manifest, const fs::path& checkpoint,
                                const fs::path& out_dir, std::ostream& log) {
  const train::TrainConfig tc = run_config(cfg, cfg.finetune, 11);
  tc.validate();
  const train::Dataset data = manifest_dataset(manifest);
  make_dirs(out_dir);
  const train::TrainRecord record =
      train::finetune(checkpoint, data, tc, out_dir / "finetuned.unw", nullptr,
                      [&](std::size_t e, double tl, double vl) { log_epoch(log, e, tl, vl); });
  write_record(out_dir, "finetune", record);
  log << "best epoch " << record.best_epoch << " val " << record.best_val_loss << '\n';
  return record;
}

void cmd_infer(const ExperimentConfig& cfg, const fs::path& manifest, const fs::path& checkpoint,
               const fs::path& out_dir, const std::string& split, std::ostream& log) {
  const nn::UNet<float> model = nn::load_checkpoint(checkpoint);
  make_dirs(out_dir / "pred");
  const fs::path root = manifest.parent_path();
  std::size_t n = 0;
  for (const io::ManifestEntry& e : io::read_manifest(manifest)) {
    if (!split.empty() && e.split != split) continue;
    train::Sample s = io::load_sample(root, e);
    const DepthMap pred = train::infer(model, s, cfg.train.input);
    io::write_depth_pfm(out_dir / "pred" / (e.scene_id + ".pfm"), pred);
    ++n;
  }
  log << "wrote " << n << " depth maps to " << (out_dir / "pred").string() << '\n';
}

eval::EvalReport cmd_eval(const ExperimentConfig& cfg, const fs::path& manifest, const std::vector<EvalModel>& models,
                          const fs::path& out_dir, const std::string& split, std::ostream& log) {
  const std::vector<train::Sample> samples = load_split(manifest, split);
  if (samples.empty()) fail(ErrorCode::EmptyDataset, "no scenes in split '" + split + "'");
  std::vector<nn::UNet<float>> nets;
  for (const EvalModel& m : models) {
    if (!m.oracle) nets.push_back(nn::load_checkpoint(m.checkpoint));
  }

  std::vector<eval::EvalCase> cases;
  for (const train::Sample& s : samples) cases.push_back({s.scene_id, s.lowfreq, s.gt});
  std::vector<eval::NamedPredictor> predictors;
  std::size_t net_index = 0;
  for (const EvalModel& m : models) {
    if (m.oracle) {
      predictors.push_back({m.name, [&](std::size_t k) { return samples[k].gt; }});
    } else {
      const nn::UNet<float>* net = &nets[net_index++];
      predictors.push_back({m.name, [&, net](std::size_t k) { return train::infer(*net, samples[k], cfg.train.input); }});
    }
  }
  // Error maps need the predictions again; infer is cheap next to the report.
  const eval::NormalizeConfig ncfg{cfg.eval.patch, cfg.eval.min_coverage, 1e-9};
  const eval::EvalReport report = eval::compare(predictors, cases, ncfg);

  make_dirs(out_dir / "errors");
  std::ofstream csv = open_out(out_dir / "report.csv");
  eval::write_report_csv(csv, report);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    std::vector<std::pair<std::string, DepthMap>> preds{{eval::kBaselineName, samples[k].lowfreq}};
    for (const eval::NamedPredictor& p : predictors) preds.emplace_back(p.name, p.predict(k));
    for (const auto& [name, pred] : preds) {
      const Tensor err = eval::error_map(pred, samples[k].gt);
      const fs::path stem = out_dir / "errors" / (samples[k].scene_id + "_" + name);
      io::write_pfm(stem.string() + ".pfm", err);
      io::write_png(stem.string() + ".png",
                    {err.dim(1), err.dim(0), 3, eval::colorize_error(err, samples[k].gt.mask, cfg.eval.error_map_max_mm)});
    }
  }
  for (const eval::ModelSummary& s : report.summary) {
    char line[160];
    std::snprintf(line, sizeof line, "%-12s rmse_raw %.4f mm  rmse_norm %.4f mm  (%zu scenes)\n", s.model_name.c_str(),
                  s.mean_rmse_raw, s.mean_rmse_norm, s.count);
    log << line;
  }
  return report;
}

void cmd_render_preview(const ExperimentConfig& cfg, std::uint64_t seed, Domain domain, const fs::path& out_dir,
                        std::ostream& log) {
  const train::Sample s = generate_scene(domain_synth(cfg, domain), cfg.rig, cfg.sparse, seed, "preview");
  make_dirs(out_dir);
  const MaskedStats gs = masked_stats(s.gt.depth, s.gt.mask);
  if (gs.count == 0) fail(ErrorCode::EmptyMask, "preview scene covers no pixel");
  const double lo = gs.mean - 3.0 * gs.stddev, hi = gs.mean + 3.0 * gs.stddev;
  Tensor gt = s.gt.depth, low = s.lowfreq.depth, diff(s.gt.depth.shape(), 0.0);
  double dmax = 1e-12;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (s.gt.mask[i] == 0.0) {
      gt[i] = low[i] = hi;
      continue;
    }
    diff[i] = s.gt.depth[i] - s.lowfreq.depth[i];
    dmax = std::max(dmax, std::abs(diff[i]));
  }
  io::write_png(out_dir / "shading.png", io::to_gray8(s.shading, 0.0, 1.0));
  io::write_png(out_dir / "pattern.png", io::to_gray8(s.pattern, 0.0, 1.0));
  io::write_png(out_dir / "gt_depth.png", io::to_gray8(gt, lo, hi));
  io::write_png(out_dir / "lowfreq_depth.png", io::to_gray8(low, lo, hi));
  io::write_png(out_dir / "residual.png", io::to_gray8(diff, -dmax, dmax));
  log << "wrote previews to " << out_dir.string() << " (residual range +-" << dmax << " mm)\n";
}

io::Image8 plot_losses(const train::TrainRecord& record, std::size_t width, std::size_t height) {
  io::Image8 img{width, height, 3, std::vector<std::uint8_t>(width * height * 3, 255)};
  const std::size_t n = record.train_loss.size();
  if (n == 0) return img;
  double lo = 1e300, hi = -1e300;
  for (std::size_t e = 0; e < n; ++e) {
    for (double v : {record.train_loss[e], record.val_loss[e]}) {
      if (v > 0.0) {
        lo = std::min(lo, std::log10(v));
        hi = std::max(hi, std::log10(v));
      }
    }
  }
  if (lo > hi) return img;
  if (hi - lo < 1e-6) hi = lo + 1.0;
  const double margin = 12.0;
  auto to_px = [&](std::size_t e, double v) {
    const double x = n == 1 ? 0.5 : static_cast<double>(e) / static_cast<double>(n - 1);
    const double y = (std::log10(std::max(v, 1e-300)) - lo) / (hi - lo);
    return std::pair<double, double>{margin + x * (static_cast<double>(width) - 2 * margin),
                                     static_cast<double>(height) - margin - y * (static_cast<double>(height) - 2 * margin)};
  };
  auto plot = [&](double x, double y, const std::array<std::uint8_t, 3>& color) {
    if (x < 0 || y < 0 || x >= static_cast<double>(width) || y >= static_cast<double>(height)) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)) * 3;
    std::copy(color.begin(), color.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>(i));
  };
  auto draw = [&](const std::vector<double>& series, const std::array<std::uint8_t, 3>& color) {
    for (std::size_t e = 0; e + 1 < n || (n == 1 && e == 0); ++e) {
      const auto [x0, y0] = to_px(e, series[e]);
      const auto [x1, y1] = n == 1 ? std::pair{x0, y0} : to_px(e + 1, series[e + 1]);
      const int steps = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
      for (int k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) / steps;
        plot(x0 + t * (x1 - x0), y0 + t * (y1 - y0), color);
      }
      if (n == 1) break;
    }
  };
  draw(record.train_loss, {40, 80, 220});
  draw(record.val_loss, {220, 50, 40});
  return img;
}

}  // namespace hifreq::cli
