// Command-line entry point: dataset generation, training, evaluation,
// gradient checks, ablations, and gate weight-map export.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lrf/commands.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string mode;
};

lrf::RunConfig resolve_config(const CommonOpts& opts) {
  lrf::RunConfig cfg =
      opts.config_path.empty() ? lrf::RunConfig{} : lrf::RunConfig::load_file(opts.config_path);
  if (opts.seed_set) {
    cfg.pipeline.seed = opts.seed;
    cfg.scene.seed = opts.seed;
  }
  if (!opts.mode.empty()) cfg.pipeline.mode = lrf::detector_mode_from_string(opts.mode);
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* app, CommonOpts& opts, bool with_mode = true) {
  app->add_option("--config", opts.config_path, "run configuration (JSON); defaults when omitted");
  app->add_option("--seed", opts.seed, "override every seed in the config")
      ->each([&](const std::string&) { opts.seed_set = true; });
  if (with_mode)
    app->add_option("--mode", opts.mode, "override pipeline mode (LO, LR_EARLY_ONLY, LR_MIDDLE_ONLY, LR_FULL)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lrfuse: LiDAR-radar fusion BEV detector playground"};
  app.require_subcommand(1);

  CommonOpts datagen_opts, train_opts, ablate_opts;
  std::string data_dir, out_dir, checkpoint, split = "val";
  int jobs = 1, scene_id = 0;

  CLI::App* cmd_datagen = app.add_subcommand("datagen", "generate a synthetic dataset");
  add_common(cmd_datagen, datagen_opts, false);
  cmd_datagen->add_option("--out", out_dir, "output dataset directory")->required();
  cmd_datagen->add_option("--jobs", jobs, "parallel scene generation");

  CLI::App* cmd_train = app.add_subcommand("train", "train a detector");
  add_common(cmd_train, train_opts);
  cmd_train->add_option("--data", data_dir, "dataset directory")->required();
  cmd_train->add_option("--out", out_dir, "run output directory")->required();

  CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  cmd_eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  cmd_eval->add_option("--data", data_dir, "dataset directory")->required();
  cmd_eval->add_option("--split", split, "train or val");
  cmd_eval->add_option("--out", out_dir, "optional output directory");
  cmd_eval->add_option("--jobs", jobs, "parallel scene evaluation");

  CLI::App* cmd_gradcheck = app.add_subcommand("gradcheck", "finite-difference checks of all learnable blocks");
  cmd_gradcheck->add_option("--out", out_dir, "optional directory for gradcheck.json");

  CLI::App* cmd_ablate = app.add_subcommand("ablate", "run the fusion-mode and gate-mode ablation grid");
  add_common(cmd_ablate, ablate_opts, false);
  cmd_ablate->add_option("--data", data_dir, "dataset directory")->required();
  cmd_ablate->add_option("--out", out_dir, "output directory")->required();

  CLI::App* cmd_export = app.add_subcommand("export-weights", "write gate weight maps (PGM + CSV) for one scene");
  cmd_export->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  cmd_export->add_option("--data", data_dir, "dataset directory")->required();
  cmd_export->add_option("--scene", scene_id, "scene id")->required();
  cmd_export->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_datagen->parsed()) {
      lrf::cmd_datagen(resolve_config(datagen_opts), out_dir, jobs, &std::cout);
    } else if (cmd_train->parsed()) {
      lrf::TrainSummary s = lrf::cmd_train(resolve_config(train_opts), data_dir, out_dir, &std::cout);
      if (s.aborted) {
        std::cerr << "training aborted: " << s.abort_reason << "\n";
        return 1;
      }
    } else if (cmd_eval->parsed()) {
      lrf::cmd_eval(checkpoint, data_dir, split, out_dir, &std::cout, jobs);
    } else if (cmd_gradcheck->parsed()) {
      lrf::GradCheckReport report = lrf::cmd_gradcheck(&std::cout);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        lrf::write_text_file(std::filesystem::path(out_dir) / "gradcheck.json",
                             report.to_json().dump(2) + "\n");
      }
      return report.all_pass ? 0 : 1;
    } else if (cmd_ablate->parsed()) {
      lrf::cmd_ablate(resolve_config(ablate_opts), data_dir, out_dir, &std::cout);
    } else if (cmd_export->parsed()) {
      lrf::cmd_export_weights(checkpoint, data_dir, scene_id, out_dir, &std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
