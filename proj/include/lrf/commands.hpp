#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrf/config.hpp"
#include "lrf/detector.hpp"
#include "lrf/formats.hpp"

namespace lrf {

// Orchestration behind the CLI subcommands. The CLI binary and the acceptance
// suite both call these; commands validate their config up front and throw on
// any error (the CLI maps exceptions to a nonzero exit code).

/// Writes the dataset plus the echoed config into out_dir.
void cmd_datagen(const RunConfig& cfg, const std::filesystem::path& out_dir, int jobs = 1,
                 std::ostream* log = nullptr);

struct TrainSummary {
  std::string run_id;
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;
  std::vector<EpochRecord> epochs;
  bool aborted = false;
  std::string abort_reason;

  const EpochRecord& final_epoch() const;
};

/// Trains on the dataset's train split, writing config.json, metrics.jsonl
/// (one JSON object per epoch) and checkpoint.lrfk into out_dir.
TrainSummary cmd_train(const RunConfig& cfg, const std::filesystem::path& data_dir,
                       const std::filesystem::path& out_dir, std::ostream* log = nullptr);

/// Evaluates a checkpoint on a dataset split; returns the metrics record and,
/// if out_dir is non-empty, writes eval_<split>.json there. jobs > 1 runs
/// scenes in parallel (results merge in scene order regardless).
Json cmd_eval(const std::filesystem::path& checkpoint_path, const std::filesystem::path& data_dir,
              const std::string& split, const std::filesystem::path& out_dir = {},
              std::ostream* log = nullptr, int jobs = 1);

struct GradCheckReport {
  struct Entry {
    std::string name;
    double max_rel_err = 0;
    bool pass = false;
  };
  std::vector<Entry> entries;
  bool all_pass = false;
  double tolerance = 1e-4;
  double seconds = 0;

  Json to_json() const;
};

/// Finite-difference verification of every learnable block (eps 1e-5, five
/// seeds each, micro-sized graphs).
GradCheckReport cmd_gradcheck(std::ostream* log = nullptr);

struct AblationRow {
  std::string name;
  DetectorMode mode = DetectorMode::kFull;
  GateMode gate_mode = GateMode::kChannelSpecific;
  bool gated = false;
  EpochRecord final_rec;
};

struct AblationReport {
  std::vector<AblationRow> rows;

  Json to_json() const;
  std::string table_text() const;
  const AblationRow& row(const std::string& name) const;
};

/// Trains {LO, LR_EARLY_ONLY, LR_MIDDLE_ONLY, LR_FULL, LR_FULL + channel-
/// constant gate} with the same seed and dataset; writes per-run outputs,
/// ablation.json, and ablation_table.txt under out_dir.
AblationReport cmd_ablate(const RunConfig& cfg, const std::filesystem::path& data_dir,
                          const std::filesystem::path& out_dir, std::ostream* log = nullptr);

/// Renders the gate weight maps of one scene to PGM + CSV (per expert).
void cmd_export_weights(const std::filesystem::path& checkpoint_path,
                        const std::filesystem::path& data_dir, int scene_id,
                        const std::filesystem::path& out_dir, std::ostream* log = nullptr);

// Checkpoint <-> params plumbing (shared by train/eval/export).
Checkpoint checkpoint_from_params(const RunConfig& cfg, DetectorParams& params);
std::pair<RunConfig, DetectorParams> params_from_checkpoint(const Checkpoint& ckpt);

/// One metrics line (run id, mode, seed, losses, AP, gate stats) as JSON.
Json epoch_record_json(const std::string& run_id, const RunConfig& cfg, const EpochRecord& rec);

std::string run_id_of(const RunConfig& cfg);

}  // namespace lrf
