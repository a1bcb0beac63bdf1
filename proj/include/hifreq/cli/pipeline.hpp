#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hifreq/cli/config.hpp"
#include "hifreq/synth/synth.hpp"
#include "hifreq/training/training.hpp"

namespace hifreq::cli {

/// Renders a scene, samples sparse depth along the projected grid and densifies
/// it with the RBF fit. The sparse stage draws from mix_seed(scene.seed, 1).
/// gt and lowfreq share one mask (pixels covered by the surface).
train::Sample generate_sample(const synth::SceneSpec& scene, const raster::RigConfig& rig,
                              const SparseConfig& sparse, std::string scene_id = {});

/// Scene drawn from Rng(seed) and rendered with generate_sample.
train::Sample generate_scene(const synth::SynthConfig& synth_cfg, const raster::RigConfig& rig,
                             const SparseConfig& sparse, std::uint64_t seed, std::string scene_id = {});

/// Seed of scene `index` of a dataset.
std::uint64_t scene_seed(std::uint64_t dataset_seed, std::size_t index);

/// Generates `count` scenes in parallel (seeds from scene_seed, ids prefix + index).
std::vector<train::Sample> generate_dataset(const synth::SynthConfig& synth_cfg, const raster::RigConfig& rig,
                                            const SparseConfig& sparse, std::uint64_t dataset_seed,
                                            std::size_t count, const std::string& prefix);

}  // namespace hifreq::cli
