#include "hifreq/cli/config.hpp"

#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "hifreq/core/error.hpp"

namespace hifreq::cli {

using nlohmann::json;

synth::SynthConfig pseudo_real_synth() {
  synth::SynthConfig c;
  c.alpha = {0.1, 0.5};
  c.lambda = {0.5, 0.6};
  c.texture_amplitude = {0.1, 0.3};
  c.texture_frequency = {0.01, 0.03};
  c.shading_noise = 0.01;
  return c;
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  c.target_synth = pseudo_real_synth();
  c.finetune.lr = 1e-4;
  c.finetune.epochs = 50;
  if (name == "desk") {
    c.rig = raster::desk_rig();
  } else if (name == "paper") {
    c.rig = raster::paper_rig();
  } else {
    fail(ErrorCode::ConfigError, "unknown preset '" + name + "' (expected desk or paper)");
  }
  return c;
}

namespace {

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json range(const synth::Range& r) { return json::array({r.min, r.max}); }

const char* to_string(train::ShadingNorm n) { return n == train::ShadingNorm::Max ? "max" : "standardize"; }
const char* to_string(train::ResidualScale s) {
  return s == train::ResidualScale::Millimeters ? "millimeters" : "lowfreq_sigma";
}

json to_json(const synth::SynthConfig& c) {
  return {{"terms", c.terms},
          {"alpha", range(c.alpha)},
          {"lambda", range(c.lambda)},
          {"psi", range(c.psi)},
          {"theta", range(c.theta)},
          {"albedo", range(c.albedo)},
          {"base_depth", c.base_depth},
          {"max_pitch_deg", c.max_pitch_deg},
          {"max_yaw_deg", c.max_yaw_deg},
          {"max_roll_deg", c.max_roll_deg},
          {"light_polar_deg", range(c.light_polar_deg)},
          {"light_azimuth_deg", range(c.light_azimuth_deg)},
          {"projector_shift_x", range(c.projector_shift_x)},
          {"projector_shift_y", range(c.projector_shift_y)},
          {"projector_shift_z", range(c.projector_shift_z)},
          {"texture_amplitude", range(c.texture_amplitude)},
          {"texture_frequency", range(c.texture_frequency)},
          {"shading_noise", c.shading_noise}};
}

json to_json(const raster::RigConfig& r) {
  return {{"camera_width", r.camera_width},       {"camera_height", r.camera_height},
          {"camera_focal", r.camera_focal},       {"projector_width", r.projector_width},
          {"projector_height", r.projector_height}, {"projector_focal", r.projector_focal},
          {"projector_position", vec3(r.projector_position)}, {"mesh_pitch", r.mesh_pitch},
          {"surface_size", r.surface_size},       {"grid_spacing", r.grid_spacing},
          {"grid_line_width", r.grid_line_width}};
}

json to_json(const train::TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"lr", t.lr},
          {"batch", t.batch},
          {"patch", t.patch},
          {"val_fraction", t.val_fraction},
          {"lum_aug", json::array({t.lum_aug.min, t.lum_aug.max})},
          {"seed", t.seed},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"eps", t.eps},
          {"base_width", t.base_width},
          {"min_patch_coverage", t.min_patch_coverage},
          {"shading_norm", to_string(t.input.shading_norm)},
          {"residual", to_string(t.input.residual)}};
}

// Reads known keys of one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) fail(ErrorCode::ConfigError, where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError, where_ + "." + key + ": " + e.what());
    }
  }

  void get(const char* key, synth::Range& out) {
    std::vector<double> v{out.min, out.max};
    get(key, v);
    if (v.size() != 2) fail(ErrorCode::ConfigError, where_ + "." + key + ": expected [min, max]");
    out = {v[0], v[1]};
  }

  void get(const char* key, Vec3& out) {
    std::vector<double> v{out.x(), out.y(), out.z()};
    get(key, v);
    if (v.size() != 3) fail(ErrorCode::ConfigError, where_ + "." + key + ": expected [x, y, z]");
    out = Vec3(v[0], v[1], v[2]);
  }

  void object(const char* key, const std::function<void(ObjectReader&)>& body) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    ObjectReader sub(*it, where_ + "." + key);
    body(sub);
    sub.finish();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(ErrorCode::ConfigError, where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read(ObjectReader& r, synth::SynthConfig& c) {
  r.get("terms", c.terms);
  r.get("alpha", c.alpha);
  r.get("lambda", c.lambda);
  r.get("psi", c.psi);
  r.get("theta", c.theta);
  r.get("albedo", c.albedo);
  r.get("base_depth", c.base_depth);
  r.get("max_pitch_deg", c.max_pitch_deg);
  r.get("max_yaw_deg", c.max_yaw_deg);
  r.get("max_roll_deg", c.max_roll_deg);
  r.get("light_polar_deg", c.light_polar_deg);
  r.get("light_azimuth_deg", c.light_azimuth_deg);
  r.get("projector_shift_x", c.projector_shift_x);
  r.get("projector_shift_y", c.projector_shift_y);
  r.get("projector_shift_z", c.projector_shift_z);
  r.get("texture_amplitude", c.texture_amplitude);
  r.get("texture_frequency", c.texture_frequency);
  r.get("shading_noise", c.shading_noise);
}

void read(ObjectReader& r, raster::RigConfig& c) {
  r.get("camera_width", c.camera_width);
  r.get("camera_height", c.camera_height);
  r.get("camera_focal", c.camera_focal);
  r.get("projector_width", c.projector_width);
  r.get("projector_height", c.projector_height);
  r.get("projector_focal", c.projector_focal);
  r.get("projector_position", c.projector_position);
  r.get("mesh_pitch", c.mesh_pitch);
  r.get("surface_size", c.surface_size);
  r.get("grid_spacing", c.grid_spacing);
  r.get("grid_line_width", c.grid_line_width);
}

void read(ObjectReader& r, train::TrainConfig& t) {
  r.get("epochs", t.epochs);
  r.get("lr", t.lr);
  r.get("batch", t.batch);
  r.get("patch", t.patch);
  r.get("val_fraction", t.val_fraction);
  synth::Range lum{t.lum_aug.min, t.lum_aug.max};
  r.get("lum_aug", lum);
  t.lum_aug = {lum.min, lum.max};
  r.get("seed", t.seed);
  r.get("beta1", t.beta1);
  r.get("beta2", t.beta2);
  r.get("eps", t.eps);
  r.get("base_width", t.base_width);
  r.get("min_patch_coverage", t.min_patch_coverage);
  std::string norm = to_string(t.input.shading_norm);
  r.get("shading_norm", norm);
  if (norm == "max") {
    t.input.shading_norm = train::ShadingNorm::Max;
  } else if (norm == "standardize") {
    t.input.shading_norm = train::ShadingNorm::Standardize;
  } else {
    fail(ErrorCode::ConfigError, "shading_norm must be max or standardize");
  }
  std::string residual = to_string(t.input.residual);
  r.get("residual", residual);
  if (residual == "millimeters") {
    t.input.residual = train::ResidualScale::Millimeters;
  } else if (residual == "lowfreq_sigma") {
    t.input.residual = train::ResidualScale::LowfreqSigma;
  } else {
    fail(ErrorCode::ConfigError, "residual must be millimeters or lowfreq_sigma");
  }
}

}  // namespace

std::string to_json_text(const ExperimentConfig& c) {
  json j = {{"seed", c.seed},
            {"preset", c.preset},
            {"output_dir", c.output_dir},
            {"gen", {{"count", c.gen.count}, {"test_fraction", c.gen.test_fraction}}},
            {"synth", to_json(c.synth)},
            {"target_synth", to_json(c.target_synth)},
            {"rig", to_json(c.rig)},
            {"sparse",
             {{"stride", c.sparse.stride},
              {"noise_sigma", c.sparse.noise_sigma},
              {"smoothing", c.sparse.smoothing},
              {"max_centers", c.sparse.max_centers}}},
            {"train", to_json(c.train)},
            {"finetune", to_json(c.finetune)},
            {"eval",
             {{"patch", c.eval.patch},
              {"min_coverage", c.eval.min_coverage},
              {"error_map_max_mm", c.eval.error_map_max_mm}}}};
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ConfigError, "config: expected an object");
  std::string preset = "desk";
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) fail(ErrorCode::ConfigError, "config.preset: expected a string");
    preset = j["preset"].get<std::string>();
  }
  ExperimentConfig c = preset_config(preset);
  ObjectReader r(j, "config");
  r.get("seed", c.seed);
  r.get("preset", c.preset);
  r.get("output_dir", c.output_dir);
  r.object("gen", [&](ObjectReader& g) {
    g.get("count", c.gen.count);
    g.get("test_fraction", c.gen.test_fraction);
  });
  r.object("synth", [&](ObjectReader& s) { read(s, c.synth); });
  r.object("target_synth", [&](ObjectReader& s) { read(s, c.target_synth); });
  r.object("rig", [&](ObjectReader& s) { read(s, c.rig); });
  r.object("sparse", [&](ObjectReader& s) {
    s.get("stride", c.sparse.stride);
    s.get("noise_sigma", c.sparse.noise_sigma);
    s.get("smoothing", c.sparse.smoothing);
    s.get("max_centers", c.sparse.max_centers);
  });
  r.object("train", [&](ObjectReader& s) { read(s, c.train); });
  r.object("finetune", [&](ObjectReader& s) { read(s, c.finetune); });
  r.object("eval", [&](ObjectReader& s) {
    s.get("patch", c.eval.patch);
    s.get("min_coverage", c.eval.min_coverage);
    s.get("error_map_max_mm", c.eval.error_map_max_mm);
  });
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, path.string() + ": cannot open config");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, path.string() + ": cannot open for writing");
  os << to_json_text(cfg);
  if (!os) fail(ErrorCode::IoError, path.string() + ": write failed");
}

}  // namespace hifreq::cli
