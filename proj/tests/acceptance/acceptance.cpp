// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/gradcheck.hpp"
#include "../support/surface_oracle.hpp"
#include "hifreq/cli/commands.hpp"
#include "hifreq/cli/config.hpp"
#include "hifreq/cli/pipeline.hpp"
#include "hifreq/eval/eval.hpp"
#include "hifreq/io/manifest.hpp"
#include "hifreq/nn/layers.hpp"
#include "hifreq/nn/loss.hpp"
#include "hifreq/nn/unet.hpp"
#include "hifreq/raster/raster.hpp"
#include "hifreq/training/training.hpp"

namespace fs = std::filesystem;
using namespace hifreq;
using hifreq::testing::check_gradient;
using hifreq::testing::random_tensor;
using hifreq::testing::weighted_sum;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- criterion 1

struct GradTally {
  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;

  void add(const std::string& name, const hifreq::testing::GradCheck& g) {
    checked += g.checked;
    if (g.max_rel_error >= worst) {
      worst = g.max_rel_error;
      worst_name = name;
    }
  }
};

template <typename T>
void primitive_checks(GradTally& tally, double eps, double floor, std::uint64_t seed) {
  Rng rng(seed);
  using Ten = BasicTensor<T>;
  {
    nn::ConvLayer<T> L(3, 4, 3);
    L.kernels = random_tensor<T>(L.kernels.shape(), rng);
    L.bias = random_tensor<T>(L.bias.shape(), rng);
    Ten x = random_tensor<T>({2, 3, 6, 5}, rng);
    const Ten w = random_tensor<T>({2, 4, 6, 5}, rng);
    const auto g = nn::conv2d_backward(x, L, w);
    auto loss = [&] { return weighted_sum(nn::conv2d_forward(x, L), w); };
    tally.add("conv2d dx", check_gradient(x, g.dx, loss, eps, 0, nullptr, floor));
    tally.add("conv2d dK", check_gradient(L.kernels, g.dkernels, loss, eps, 0, nullptr, floor));
    tally.add("conv2d db", check_gradient(L.bias, g.dbias, loss, eps, 0, nullptr, floor));
  }
  {
    nn::ConvLayer<T> L(4, 1, 1);
    L.kernels = random_tensor<T>(L.kernels.shape(), rng);
    Ten x = random_tensor<T>({1, 4, 4, 4}, rng);
    const Ten w = random_tensor<T>({1, 1, 4, 4}, rng);
    const auto g = nn::conv2d_backward(x, L, w);
    auto loss = [&] { return weighted_sum(nn::conv2d_forward(x, L), w); };
    tally.add("conv1x1 dx", check_gradient(x, g.dx, loss, eps, 0, nullptr, floor));
    tally.add("conv1x1 dK", check_gradient(L.kernels, g.dkernels, loss, eps, 0, nullptr, floor));
  }
  {
    nn::UpConvLayer<T> L(3, 2);
    L.kernels = random_tensor<T>(L.kernels.shape(), rng);
    L.bias = random_tensor<T>(L.bias.shape(), rng);
    Ten x = random_tensor<T>({2, 3, 3, 4}, rng);
    const Ten w = random_tensor<T>({2, 2, 6, 8}, rng);
    const auto g = nn::upconv2_backward(x, L, w);
    auto loss = [&] { return weighted_sum(nn::upconv2_forward(x, L), w); };
    tally.add("upconv dx", check_gradient(x, g.dx, loss, eps, 0, nullptr, floor));
    tally.add("upconv dK", check_gradient(L.kernels, g.dkernels, loss, eps, 0, nullptr, floor));
    tally.add("upconv db", check_gradient(L.bias, g.dbias, loss, eps, 0, nullptr, floor));
  }
  {
    // Distinct values spaced far beyond the difference step keep the argmax fixed.
    Ten x({2, 2, 4, 6});
    std::vector<double> vals(x.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.05 * static_cast<double>(i) - 2.0;
    rng.shuffle(vals);
    for (std::size_t i = 0; i < vals.size(); ++i) x[i] = static_cast<T>(vals[i]);
    const Ten w = random_tensor<T>({2, 2, 2, 3}, rng);
    const auto p = nn::maxpool2_forward(x);
    const Ten dx = nn::maxpool2_backward(w, p.argmax, x.shape());
    tally.add("maxpool", check_gradient(x, dx, [&] { return weighted_sum(nn::maxpool2_forward(x).y, w); }, eps, 0,
                                        nullptr, floor));
  }
  {
    Ten x = hifreq::testing::random_away_from_zero<T>({2, 3, 4, 4}, rng, 0.05);
    const Ten w = random_tensor<T>(x.shape(), rng);
    const Ten dx = nn::relu_backward(nn::relu_forward(x), w);
    tally.add("relu", check_gradient(x, dx, [&] { return weighted_sum(nn::relu_forward(x), w); }, eps, 0, nullptr,
                                     floor));
  }
  {
    Ten a = random_tensor<T>({2, 2, 3, 3}, rng), b = random_tensor<T>({2, 3, 3, 3}, rng);
    const Ten w = random_tensor<T>({2, 5, 3, 3}, rng);
    const auto [da, db] = nn::concat_backward(w, 2);
    auto loss = [&] { return weighted_sum(nn::concat_forward(a, b), w); };
    tally.add("concat a", check_gradient(a, da, loss, eps, 0, nullptr, floor));
    tally.add("concat b", check_gradient(b, db, loss, eps, 0, nullptr, floor));
  }
  {
    Ten p = random_tensor<T>({2, 1, 5, 5}, rng);
    const Ten t = random_tensor<T>(p.shape(), rng);
    Ten m(p.shape());
    for (T& v : m.values()) v = rng.uniform() < 0.6 ? T{1} : T{0};
    m[0] = T{1};
    const Ten g = nn::masked_mse(p, t, m).grad;
    tally.add("masked_mse",
              check_gradient(p, g, [&] { return nn::masked_mse(p, t, m).value; }, eps, 0, nullptr, floor));
  }
}

// Tiny U-Net (width 4, 24 x 24) under masked MSE against the initial prediction
// plus uniform noise of half-width `offset`. A small offset keeps the loss small
// next to its gradients, so round-off in the central differences stays well
// below the gradients of deep layers. Analytic gradients use storage type T;
// differences are always taken in 64-bit on a copy of the same weights.
// `limit` = 0 checks every parameter.
template <typename T>
void unet_checks(GradTally& tally, double offset, std::size_t limit, std::uint64_t seed) {
  Rng rng(seed);
  const nn::UNetArch arch{3, 4, 3};
  nn::UNet<double> ref(arch);
  ref.init(rng);
  for (auto& p : ref.parameters()) {
    if (p.tensor->rank() == 1) *p.tensor = random_tensor<double>(p.tensor->shape(), rng, -0.1, 0.1);
  }
  const Tensor x = random_tensor<double>({1, 3, 24, 24}, rng);
  Tensor target = nn::unet_forward(ref, x);
  for (double& v : target.values()) v += rng.uniform(-offset, offset);
  Tensor mask({1, 1, 24, 24}, 1.0);
  for (std::size_t i = 0; i < mask.size(); i += 3) mask[i] = 0.0;

  auto cast = [](const auto& t) {
    BasicTensor<T> out(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<T>(t[i]);
    return out;
  };
  nn::UNet<T> m(arch);
  {
    auto dst = m.parameters();
    auto src = ref.parameters();
    for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].tensor = cast(*src[i].tensor);
    // The 64-bit reference uses the weights exactly as stored in T.
    for (std::size_t i = 0; i < dst.size(); ++i)
      for (std::size_t k = 0; k < src[i].tensor->size(); ++k) (*src[i].tensor)[k] = static_cast<double>((*dst[i].tensor)[k]);
  }
  nn::UNetCache<T> cache;
  const auto lv = nn::masked_mse(nn::unet_forward(m, cast(x), cache), cast(target), cast(mask));
  const nn::UNet<T> g = nn::unet_backward(m, cache, lv.grad);
  auto loss = [&] { return nn::masked_mse(nn::unet_forward(ref, x), target, mask).value; };
  auto params = ref.parameters();
  auto grads = g.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor analytic(grads[i].tensor->shape());
    for (std::size_t k = 0; k < analytic.size(); ++k) analytic[k] = static_cast<double>((*grads[i].tensor)[k]);
    tally.add("unet " + params[i].name, check_gradient(*params[i].tensor, analytic, loss, 1e-6, limit, &rng, 1e-6));
  }
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  GradTally f64, f32;
  primitive_checks<double>(f64, 1e-6, 1e-6, 101);
  unet_checks<double>(f64, 0.01, 0, 102);
  primitive_checks<float>(f32, 1e-2, 1e-3, 201);
  unet_checks<float>(f32, 1.0, 64, 202);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = f64.worst < 1e-5 && f32.worst < 1e-2 && secs < 60.0;
  o.detail = "64-bit max rel err " + fmt("%.2e", f64.worst) + " (" + f64.worst_name + ", " +
             std::to_string(f64.checked) + " entries, limit 1e-5); 32-bit " + fmt("%.2e", f32.worst) + " (" +
             f32.worst_name + ", limit 1e-2); " + fmt("%.1f", secs) + " s (limit 60)";
  return o;
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const raster::RigConfig rig = raster::desk_rig();
  const raster::PinholeDevice cam = raster::rig_camera(rig);
  const synth::SynthConfig cfg;
  double worst_rmse = 0.0, worst_depth = 0.0;
  std::size_t pixels = 0;
  const std::size_t W = cam.width, H = cam.height;
  for (std::size_t k = 0; k < 50; ++k) {
    Rng rng(mix_seed(2002, k));
    const synth::SceneSpec scene = synth::sample_scene(rng, cfg);
    const raster::RenderOutput out = raster::render_scene(scene, rig);
    double se = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 1; r + 1 < H; ++r) {
      for (std::size_t c = 1; c + 1 < W; ++c) {
        bool interior = true;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) interior = interior && out.depth.valid(r + dr, c + dc);
        if (!interior) continue;
        const auto hit = hifreq::testing::intersect_surface(scene.params, scene.pose, rig.surface_size / 2,
                                                            cam.back_project(static_cast<double>(c), static_cast<double>(r)));
        if (!hit) continue;
        const double analytic = scene.albedo * std::max(0.0, hit->normal.dot(-scene.light_dir));
        const double e = analytic - out.shading(r, c);
        se += e * e;
        ++n;
        worst_depth = std::max(worst_depth, std::abs(hit->world.z() - out.depth.depth(r, c)));
      }
    }
    if (n == 0) return {false, "scene " + std::to_string(k) + " has no interior pixels"};
    pixels += n;
    worst_rmse = std::max(worst_rmse, std::sqrt(se / static_cast<double>(n)));
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_rmse < 0.01 && worst_depth <= 0.1 && secs < 120.0;
  o.detail = "50 scenes, " + std::to_string(pixels) + " interior pixels; worst shading RMSE " +
             fmt("%.4f", worst_rmse) + " (limit 0.01), worst depth error " + fmt("%.4f", worst_depth) +
             " mm (limit 0.1); " + fmt("%.1f", secs) + " s (limit 120)";
  return o;
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion3() {
  const cli::ExperimentConfig base = cli::preset_config("desk");
  double worst_ratio = 1e9;
  std::string worst_case;
  std::size_t scenes = 0;
  for (double lambda : {0.15, 0.2, 0.3, 0.4, 0.5}) {
    for (std::size_t k = 0; k < 8; ++k) {
      synth::SynthConfig sc = base.synth;
      sc.terms = 1;
      sc.lambda = {lambda, lambda};
      sc.alpha = {0.25, 1.0};
      const train::Sample s = cli::generate_scene(sc, base.rig, base.sparse, mix_seed(3003, scenes));
      const double alpha = s.scene->params.terms[0].alpha;
      const double ratio = eval::rmse(s.lowfreq, s.gt) / alpha;
      if (ratio < worst_ratio) {
        worst_ratio = ratio;
        worst_case = "lambda " + fmt("%.2f", lambda) + ", alpha " + fmt("%.2f", alpha);
      }
      ++scenes;
    }
  }
  Outcome o;
  o.pass = worst_ratio >= 0.5;
  o.detail = std::to_string(scenes) + " single-wave scenes, lambda 0.15..0.5; min RMSE(lowfreq, gt)/alpha " +
             fmt("%.3f", worst_ratio) + " at " + worst_case + " (limit >= 0.5)";
  return o;
}

// ---------------------------------------------------------------- criteria 4-6

struct Shared {
  fs::path work;
  cli::ExperimentConfig desk;
  fs::path synth_manifest;
  fs::path synth_model;
};

cli::ExperimentConfig desk_experiment() {
  cli::ExperimentConfig cfg = cli::preset_config("desk");
  cfg.seed = 4004;
  cfg.gen.count = 120;
  cfg.gen.test_fraction = 0.2;
  cfg.train.val_fraction = 0.2;
  cfg.train.epochs = 60;
  return cfg;
}

Outcome criterion4(Shared& sh, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const cli::ExperimentConfig& cfg = sh.desk;
  const cli::GenResult gen = cli::cmd_gen(cfg, sh.work / "c4" / "data", cli::Domain::Synthetic, log);
  if (gen.generated != cfg.gen.count) return {false, std::to_string(gen.skipped) + " scenes failed to generate"};
  cli::cmd_train(cfg, gen.manifest, sh.work / "c4" / "run", log);
  sh.synth_manifest = gen.manifest;
  sh.synth_model = sh.work / "c4" / "run" / "model.unw";
  const eval::EvalReport rep =
      cli::cmd_eval(cfg, gen.manifest, {{"model", sh.synth_model, false}}, sh.work / "c4" / "eval", "test", log);
  const double model = rep.model("model").mean_rmse_norm;
  const double base = rep.model(eval::kBaselineName).mean_rmse_norm;
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = model <= 0.7 * base;
  o.detail = std::to_string(rep.model("model").count) + " held-out scenes; rmse_norm model " + fmt("%.4f", model) +
             " mm vs lowfreq " + fmt("%.4f", base) + " mm, ratio " + fmt("%.3f", model / base) +
             " (limit 0.7); " + fmt("%.0f", secs) + " s on this machine";
  return o;
}

Outcome criterion5(Shared& sh, std::ostream& log) {
  if (sh.synth_model.empty()) return {false, "needs the criterion 4 model"};
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> vs_scratch, vs_synth;
  std::string rows;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    cli::ExperimentConfig cfg = sh.desk;
    cfg.seed = 5000 + seed;
    // 20 target scenes for adaptation (14 train, 6 val) plus 20 held out.
    cfg.gen.count = 40;
    cfg.gen.test_fraction = 0.5;
    cfg.train.val_fraction = 0.15;
    cfg.finetune.val_fraction = 0.15;
    cfg.train.epochs = cfg.finetune.epochs;
    const fs::path dir = sh.work / "c5" / ("seed" + std::to_string(seed));
    const cli::GenResult gen = cli::cmd_gen(cfg, dir / "data", cli::Domain::Target, log);
    if (gen.generated != cfg.gen.count) return {false, "target scenes failed to generate"};
    cli::cmd_finetune(cfg, gen.manifest, sh.synth_model, dir / "finetune", log);
    cli::cmd_train(cfg, gen.manifest, dir / "scratch", log);
    const eval::EvalReport rep = cli::cmd_eval(cfg, gen.manifest,
                                               {{"finetuned", dir / "finetune" / "finetuned.unw", false},
                                                {"scratch", dir / "scratch" / "model.unw", false},
                                                {"synthetic", sh.synth_model, false}},
                                               dir / "eval", "test", log);
    const double ft = rep.model("finetuned").mean_rmse_norm;
    const double sc = rep.model("scratch").mean_rmse_norm;
    const double sy = rep.model("synthetic").mean_rmse_norm;
    vs_scratch.push_back(sc - ft);
    vs_synth.push_back(sy - ft);
    rows += " seed " + std::to_string(seed) + ": ft " + fmt("%.4f", ft) + " scratch " + fmt("%.4f", sc) + " synth " +
            fmt("%.4f", sy) + ";";
  }
  const double m1 = median(vs_scratch), m2 = median(vs_synth);
  Outcome o;
  o.pass = m1 > 0.0 && m2 > 0.0;
  o.detail = "median margin vs scratch " + fmt("%.4f", m1) + " mm, vs synthetic-only " + fmt("%.4f", m2) +
             " mm (both must be > 0);" + rows + " " + fmt("%.0f", seconds_since(t0)) + " s";
  return o;
}

Outcome criterion6(Shared& sh, std::ostream& log) {
  fs::path manifest = sh.synth_manifest, model_path = sh.synth_model;
  std::string split = "test";
  if (model_path.empty()) {
    // Criterion 4 skipped: train a small model instead.
    cli::ExperimentConfig cfg = sh.desk;
    cfg.gen.count = 8;
    cfg.train.epochs = 2;
    const cli::GenResult gen = cli::cmd_gen(cfg, sh.work / "c6" / "data", cli::Domain::Synthetic, log);
    cli::cmd_train(cfg, gen.manifest, sh.work / "c6" / "run", log);
    manifest = gen.manifest;
    model_path = sh.work / "c6" / "run" / "model.unw";
    split = "";
  }
  const nn::UNet<float> model = nn::load_checkpoint(model_path);
  const std::vector<train::Sample> samples = cli::load_split(manifest, split);
  const eval::NormalizeConfig ncfg{sh.desk.eval.patch, sh.desk.eval.min_coverage, 1e-9};
  double worst = 0.0;
  std::size_t checks = 0;
  for (const train::Sample& s : samples) {
    const DepthMap pred = train::infer(model, s, sh.desk.train.input);
    const double base = eval::rmse_norm(pred, s.gt, ncfg);
    for (double a : {0.5, 2.0}) {
      for (double b : {-10.0, 10.0}) {
        DepthMap t = pred;
        for (double& v : t.depth.values()) v = a * v + b;
        worst = std::max(worst, std::abs(eval::rmse_norm(t, s.gt, ncfg) - base));
        ++checks;
      }
    }
  }
  Outcome o;
  o.pass = checks > 0 && worst <= 1e-9;
  o.detail = std::to_string(checks) + " (scene, a, b) cases on a trained model; max |delta rmse_norm| " +
             fmt("%.2e", worst) + " mm (limit 1e-9)";
  return o;
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7(Shared& sh, std::ostream& log) {
  cli::ExperimentConfig cfg = sh.desk;
  cfg.seed = 7007;
  cfg.gen.count = 12;
  cfg.gen.test_fraction = 0.0;
  cfg.train.val_fraction = 0.25;
  cfg.train.epochs = 2;
  std::string manifest[2], csv[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = sh.work / "c7" / ("run" + std::to_string(run));
    const cli::GenResult gen = cli::cmd_gen(cfg, dir / "data", cli::Domain::Synthetic, log);
    cli::cmd_train(cfg, gen.manifest, dir / "train", log);
    manifest[run] = slurp(gen.manifest);
    csv[run] = slurp(dir / "train" / "train_record.csv");
  }
  Outcome o;
  const bool same_manifest = !manifest[0].empty() && manifest[0] == manifest[1];
  const bool same_csv = !csv[0].empty() && csv[0] == csv[1];
  o.pass = same_manifest && same_csv;
  o.detail = std::string("manifest ") + (same_manifest ? "identical" : "DIFFERS") + " (" +
             std::to_string(manifest[0].size()) + " bytes), loss CSV " + (same_csv ? "identical" : "DIFFERS") + " (" +
             std::to_string(csv[0].size()) + " bytes)";
  return o;
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion8(Shared& sh) {
  const auto t0 = std::chrono::steady_clock::now();
  const cli::ExperimentConfig& cfg = sh.desk;
  train::Sample s = cli::generate_scene(cfg.synth, cfg.rig, cfg.sparse, mix_seed(8008, 0), "overfit");
  train::TrainConfig tc = cfg.train;
  tc.seed = 8;
  tc.batch = 1;
  Rng prng = Rng(tc.seed).fork(1);
  train::PatchSet one = train::make_patches({s}, tc, prng);
  one.patches.resize(1);
  nn::UNet<float> model(tc.arch());
  Rng init(81);
  model.init(init);
  const double initial = train::evaluate_loss(model, one);
  const std::size_t P = one.patches[0].height();
  std::vector<std::size_t> order{0};
  nn::Adam<float> adam(model, tc.adam());
  nn::UNetCache<float> cache;
  // Fixed inputs: no luminance augmentation, so the same batch every step.
  const train::Batch b = train::make_batch(one, order, 0, 1);
  // Loss after each step; the forward of step k scores the weights left by step k - 1.
  double best = initial;
  std::size_t best_step = 0;
  for (std::size_t step = 0; step < 500; ++step) {
    const TensorF pred = nn::unet_forward(model, b.x, cache);
    const nn::LossValue<float> loss = nn::masked_mse(pred, b.y, b.mask);
    if (step > 0 && loss.value < best) {
      best = loss.value;
      best_step = step;
    }
    adam.step(model, nn::unet_backward(model, cache, loss.grad));
  }
  const double final_loss = train::evaluate_loss(model, one);
  if (final_loss < best) {
    best = final_loss;
    best_step = 500;
  }
  Outcome o;
  o.pass = best < 1e-4 * initial;
  o.detail = "one " + std::to_string(P) + "x" + std::to_string(P) + " patch, 500 Adam steps, no augmentation, lr " +
             fmt("%g", tc.lr) + ": masked MSE " + fmt("%.3e", initial) + ", lowest " + fmt("%.3e", best) +
             " after step " + std::to_string(best_step) + " (ratio " + fmt("%.2e", best / initial) +
             ", limit 1e-4), final " + fmt("%.3e", final_loss) + "; " + fmt("%.0f", seconds_since(t0)) + " s";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Scratch directory (recreated)");
  app.add_option("--criteria", only, "Subset of criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  std::set<int> run(only.begin(), only.end());
  if (run.empty()) run = {1, 2, 3, 4, 5, 6, 7, 8};
  Shared sh;
  sh.work = fs::absolute(work);
  fs::remove_all(sh.work);
  fs::create_directories(sh.work);
  sh.desk = desk_experiment();
  std::ofstream log(sh.work / "acceptance.log");

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"gradient suite", [] { return criterion1(); }}},
      {2, {"renderer oracle", [] { return criterion2(); }}},
      {3, {"information loss", [] { return criterion3(); }}},
      {4, {"synthetic replication", [&] { return criterion4(sh, log); }}},
      {5, {"fine-tuning", [&] { return criterion5(sh, log); }}},
      {6, {"affine invariance", [&] { return criterion6(sh, log); }}},
      {7, {"determinism", [&] { return criterion7(sh, log); }}},
      {8, {"overfit sanity", [&] { return criterion8(sh); }}},
  };

  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!run.count(id)) continue;
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << id << " (" << entry.first << "): " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
