#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hifreq/cli/config.hpp"
#include "hifreq/eval/eval.hpp"
#include "hifreq/io/image_io.hpp"
#include "hifreq/training/training.hpp"

namespace hifreq::cli {

enum class Domain { Synthetic, Target };
Domain parse_domain(const std::string& name);

struct GenResult {
  std::filesystem::path manifest;
  std::size_t generated = 0;
  std::size_t skipped = 0;

  /// More than 1% of the requested scenes failed.
  bool too_many_skipped() const { return skipped * 100 > (generated + skipped); }
};

/// Split label per scene index: a seeded shuffle puts round(count *
/// test_fraction) scenes in "test", the next round(count * val_fraction) in
/// "val" and the rest in "train".
std::vector<std::string> assign_splits(std::size_t count, double test_fraction, double val_fraction, Rng& rng);

/// Renders cfg.gen.count scenes into out_dir/scenes and writes
/// out_dir/manifest.jsonl plus out_dir/config.json. Splits are assigned by a
/// seeded shuffle: round(count * test_fraction) test, round(count *
/// val_fraction) val, the rest train. Failing scenes are skipped and logged.
GenResult cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, Domain domain,
                  std::ostream& log);

/// Loads every entry of `split` ("" = all).
std::vector<train::Sample> load_split(const std::filesystem::path& manifest, const std::string& split);

/// Trains from scratch on the manifest's train/val splits. Writes model.unw,
/// train_record.csv and train_curve.png into out_dir.
train::TrainRecord cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& manifest,
                             const std::filesystem::path& out_dir, std::ostream& log);

/// Fine-tunes `checkpoint` with cfg.finetune. Writes finetuned.unw,
/// finetune_record.csv and finetune_curve.png.
train::TrainRecord cmd_finetune(const ExperimentConfig& cfg, const std::filesystem::path& manifest,
                                const std::filesystem::path& checkpoint, const std::filesystem::path& out_dir,
                                std::ostream& log);

/// Writes out_dir/pred/<scene_id>.pfm for every entry of `split`.
void cmd_infer(const ExperimentConfig& cfg, const std::filesystem::path& manifest,
               const std::filesystem::path& checkpoint, const std::filesystem::path& out_dir, const std::string& split,
               std::ostream& log);

struct EvalModel {
  std::string name;
  std::filesystem::path checkpoint;  // empty with `oracle`
  bool oracle = false;               // predicts the ground truth itself
};

/// Scores models and the low-frequency baseline on `split`. Writes report.csv
/// and per scene/model error maps (PFM + PNG) under out_dir/errors.
eval::EvalReport cmd_eval(const ExperimentConfig& cfg, const std::filesystem::path& manifest,
                          const std::vector<EvalModel>& models, const std::filesystem::path& out_dir,
                          const std::string& split, std::ostream& log);

/// Renders the scene of `seed` and writes PNG previews of shading, pattern,
/// ground-truth depth, low-frequency depth and their difference.
void cmd_render_preview(const ExperimentConfig& cfg, std::uint64_t seed, Domain domain,
                        const std::filesystem::path& out_dir, std::ostream& log);

/// Log-scale plot of train (blue) and validation (red) loss per epoch.
io::Image8 plot_losses(const train::TrainRecord& record, std::size_t width = 640, std::size_t height = 360);

}  // namespace hifreq::cli
