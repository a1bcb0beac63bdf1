#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "hifreq/raster/raster.hpp"
#include "hifreq/synth/synth.hpp"
#include "hifreq/training/training.hpp"

namespace hifreq::cli {

struct SparseConfig {
  std::size_t stride = 4;
  double noise_sigma = 0.05;  // mm
  double smoothing = 1e-3;
  std::size_t max_centers = 2000;

  friend bool operator==(const SparseConfig&, const SparseConfig&) = default;
};

struct GenConfig {
  std::size_t count = 600;
  double test_fraction = 0.0;  // scenes held out from both training splits

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

struct EvalConfig {
  std::size_t patch = 49;
  double min_coverage = 0.25;
  double error_map_max_mm = 2.0;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string preset = "desk";
  std::string output_dir = "out";
  GenConfig gen;
  synth::SynthConfig synth;
  synth::SynthConfig target_synth;
  raster::RigConfig rig;
  SparseConfig sparse;
  train::TrainConfig train;
  train::TrainConfig finetune;
  EvalConfig eval;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Shifted "pseudo-real" target domain: higher, disjoint frequency band,
/// smaller amplitudes, albedo texture and shading noise.
synth::SynthConfig pseudo_real_synth();

/// "desk" (240 x 240 camera) or "paper" (1200 x 1200). Throws ConfigError.
ExperimentConfig preset_config(const std::string& name);

/// Full JSON text of a config; parse_config(to_json_text(c)) == c.
std::string to_json_text(const ExperimentConfig& cfg);

/// Starts from the preset named by the "preset" key (default "desk") and
/// applies every other key. Unknown keys and wrong types throw ConfigError.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

}  // namespace hifreq::cli
