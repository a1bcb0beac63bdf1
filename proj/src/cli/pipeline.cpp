#include "hifreq/cli/pipeline.hpp"

#include <cstdio>
#include <optional>

#include "hifreq/core/parallel.hpp"
#include "hifreq/core/rng.hpp"
#include "hifreq/raster/raster.hpp"
#include "hifreq/sparse/sparse_depth.hpp"

namespace hifreq::cli {

train::Sample generate_sample(const synth::SceneSpec& scene, const raster::RigConfig& rig, const SparseConfig& sparse,
                              std::string scene_id) {
  raster::RenderOutput r = raster::render_scene(scene, rig);
  Rng rng(mix_seed(scene.seed, 1));
  const sparse::SparseDepth samples = sparse::sample_sparse(r.depth, r.pattern, sparse.stride, sparse.noise_sigma, rng);
  const sparse::RbfModel model = sparse::rbf_fit(samples, sparse.smoothing, sparse.max_centers, rng);

  train::Sample s;
  s.scene_id = std::move(scene_id);
  s.lowfreq = sparse::rbf_eval(model, r.depth.mask);
  s.shading = std::move(r.shading);
  s.pattern = std::move(r.pattern);
  s.gt = std::move(r.depth);
  s.scene = scene;
  return s;
}

train::Sample generate_scene(const synth::SynthConfig& synth_cfg, const raster::RigConfig& rig,
                             const SparseConfig& sparse, std::uint64_t seed, std::string scene_id) {
  Rng rng(seed);
  const synth::SceneSpec scene = synth::sample_scene(rng, synth_cfg);
  return generate_sample(scene, rig, sparse, std::move(scene_id));
}

std::uint64_t scene_seed(std::uint64_t dataset_seed, std::size_t index) {
  return mix_seed(dataset_seed, 0x5ce7e000ULL + index);
}

std::vector<train::Sample> generate_dataset(const synth::SynthConfig& synth_cfg, const raster::RigConfig& rig,
                                            const SparseConfig& sparse, std::uint64_t dataset_seed,
                                            std::size_t count, const std::string& prefix) {
  std::vector<train::Sample> out(count);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "%s%04zu", prefix.c_str(), i);
      out[i] = generate_scene(synth_cfg, rig, sparse, scene_seed(dataset_seed, i), id);
    }
  });
  return out;
}

}  // namespace hifreq::cli
