#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hifreq/cli/commands.hpp"
#include "hifreq/cli/config.hpp"
#include "hifreq/core/error.hpp"

namespace fs = std::filesystem;
using namespace hifreq;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string preset;
};

cli::ExperimentConfig resolve(const Common& c) {
  cli::ExperimentConfig cfg = c.config.empty() ? cli::preset_config(c.preset.empty() ? "desk" : c.preset)
                                               : cli::load_config(c.config);
  if (!c.config.empty() && !c.preset.empty() && c.preset != cfg.preset) {
    fail(ErrorCode::ConfigError, "--preset conflicts with the config file's preset");
  }
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Experiment config (JSON)");
  app->add_option("--seed", c.seed, "Experiment seed");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--preset", c.preset, "Rig preset")->check(CLI::IsMember({"desk", "paper"}));
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
      return 2;
    case ErrorCode::ConfigError:
      return 1;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shading-guided high-frequency depth recovery"};
  app.require_subcommand(1);

  Common common;
  std::string domain = "synthetic";
  std::optional<std::size_t> count;
  std::optional<std::size_t> epochs;
  std::string manifest, checkpoint, split;
  std::vector<std::string> model_specs;
  bool oracle = false;
  bool dump_config = false;

  auto* gen = app.add_subcommand("gen", "Render a dataset and its manifest");
  add_common(gen, common);
  gen->add_option("--count", count, "Number of scenes");
  gen->add_option("--domain", domain)->check(CLI::IsMember({"synthetic", "target"}));
  gen->add_flag("--dump-config", dump_config, "Print the resolved config and exit");

  auto* tr = app.add_subcommand("train", "Train a model from scratch");
  add_common(tr, common);
  tr->add_option("--manifest", manifest, "Dataset manifest")->required();
  tr->add_option("--epochs", epochs);

  auto* ft = app.add_subcommand("finetune", "Fine-tune a checkpoint on a target dataset");
  add_common(ft, common);
  ft->add_option("--manifest", manifest, "Target dataset manifest")->required();
  ft->add_option("--checkpoint", checkpoint, "Source weights")->required();
  ft->add_option("--epochs", epochs);

  auto* inf = app.add_subcommand("infer", "Predict depth maps");
  add_common(inf, common);
  inf->add_option("--manifest", manifest)->required();
  inf->add_option("--checkpoint", checkpoint)->required();
  inf->add_option("--split", split, "Only this split (default: all)");

  auto* ev = app.add_subcommand("eval", "Patch-normalized RMSE report");
  add_common(ev, common);
  ev->add_option("--manifest", manifest)->required();
  ev->add_option("--checkpoint", checkpoint, "Model to evaluate (named 'model')");
  ev->add_option("--model", model_specs, "Additional models as name=path");
  ev->add_flag("--oracle", oracle, "Add a model that predicts the ground truth");
  ev->add_option("--split", split, "Split to score (default: val)");

  auto* prev = app.add_subcommand("render-preview", "Render one scene to PNG previews");
  add_common(prev, common);
  prev->add_option("--domain", domain)->check(CLI::IsMember({"synthetic", "target"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    cli::ExperimentConfig cfg = resolve(common);
    const fs::path out = cfg.output_dir;
    if (gen->parsed()) {
      if (count) cfg.gen.count = *count;
      if (dump_config) {
        std::cout << cli::to_json_text(cfg);
        return 0;
      }
      const cli::GenResult r = cli::cmd_gen(cfg, out, cli::parse_domain(domain), std::cout);
      return r.too_many_skipped() ? 3 : 0;
    }
    if (tr->parsed()) {
      if (epochs) cfg.train.epochs = *epochs;
      cli::cmd_train(cfg, manifest, out, std::cout);
    } else if (ft->parsed()) {
      if (epochs) cfg.finetune.epochs = *epochs;
      cli::cmd_finetune(cfg, manifest, checkpoint, out, std::cout);
    } else if (inf->parsed()) {
      cli::cmd_infer(cfg, manifest, checkpoint, out, split, std::cout);
    } else if (ev->parsed()) {
      std::vector<cli::EvalModel> models;
      if (!checkpoint.empty()) models.push_back({"model", checkpoint, false});
      for (const std::string& spec : model_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorCode::ConfigError, "--model expects name=path");
        models.push_back({spec.substr(0, eq), spec.substr(eq + 1), false});
      }
      if (oracle) models.push_back({"oracle", {}, true});
      cli::cmd_eval(cfg, manifest, models, out, split.empty() ? "val" : split, std::cout);
    } else if (prev->parsed()) {
      cli::cmd_render_preview(cfg, cfg.seed, cli::parse_domain(domain), out, std::cout);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
