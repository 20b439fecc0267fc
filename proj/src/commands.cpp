#include "lrf/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lrf/dataset.hpp"
#include "lrf/errors.hpp"

namespace lrf {

namespace {

namespace fs = std::filesystem;
using i64 = std::int64_t;

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json opt_vec_json(const std::vector<std::optional<double>>& v) {
  Json arr = Json::array();
  for (const auto& e : v) arr.push_back(opt_json(e));
  return arr;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
}

std::string fmt_opt(const std::optional<double>& v, int width = 8) {
  std::ostringstream os;
  if (v)
    os << std::setw(width) << std::fixed << std::setprecision(4) << *v;
  else
    os << std::setw(width) << "-";
  return os.str();
}

}  // namespace

std::string run_id_of(const RunConfig& cfg) {
  std::string id = to_string(cfg.pipeline.mode);
  if (mode_has_gate(cfg.pipeline.mode)) id += "_" + to_string(cfg.pipeline.gate.mode);
  id += "_seed" + std::to_string(cfg.pipeline.seed);
  return id;
}

Json epoch_record_json(const std::string& run_id, const RunConfig& cfg, const EpochRecord& rec) {
  Json j;
  j["run_id"] = run_id;
  j["mode"] = to_string(cfg.pipeline.mode);
  j["gate_mode"] = to_string(cfg.pipeline.gate.mode);
  j["seed"] = cfg.pipeline.seed;
  j["epoch"] = rec.epoch;
  j["loss"] = rec.mean_loss;
  j["ap"] = opt_json(rec.val_ap);
  j["ap_bins"] = opt_vec_json(rec.val_ap_bins);
  j["vel_err"] = opt_json(rec.val_vel_err);
  j["gate_lidar_mean"] = opt_json(rec.gate_lidar_mean);
  j["gate_radar_mean"] = opt_json(rec.gate_radar_mean);
  j["gate_lidar_bins"] = opt_vec_json(rec.gate_lidar_bins);
  j["gate_radar_bins"] = opt_vec_json(rec.gate_radar_bins);
  return j;
}

void cmd_datagen(const RunConfig& cfg, const fs::path& out_dir, int jobs, std::ostream* log) {
  cfg.validate();
  ensure_dir(out_dir);
  cfg.save_file(out_dir / "config.json");
  generate_dataset(cfg, out_dir, jobs);
  if (log)
    *log << "wrote " << cfg.datagen.n_scenes << " scenes (" << to_string(cfg.scene.weather)
         << ", base seed " << cfg.scene.seed << ") to " << out_dir.string() << "\n";
}

const EpochRecord& TrainSummary::final_epoch() const {
  if (epochs.empty()) throw ContractError("train run produced no epochs");
  return epochs.back();
}

TrainSummary cmd_train(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir,
                       std::ostream* log) {
  cfg.validate();
  ensure_dir(out_dir);
  cfg.save_file(out_dir / "config.json");

  Dataset ds = load_dataset(data_dir);
  TrainSummary summary;
  summary.run_id = run_id_of(cfg);
  summary.metrics_path = out_dir / "metrics.jsonl";
  summary.checkpoint_path = out_dir / "checkpoint.lrfk";

  std::ofstream metrics(summary.metrics_path, std::ios::trunc);
  if (!metrics) throw IoError("cannot write " + summary.metrics_path.string());

  TrainResult tr = train_detector(cfg, ds, [&](const EpochRecord& rec) {
    metrics << epoch_record_json(summary.run_id, cfg, rec).dump() << "\n";
    metrics.flush();
    if (log) {
      *log << "[" << summary.run_id << "] epoch " << rec.epoch << " loss " << rec.mean_loss
           << " val_ap " << (rec.val_ap ? std::to_string(*rec.val_ap) : std::string("-"))
           << " vel_err "
           << (rec.val_vel_err ? std::to_string(*rec.val_vel_err) : std::string("-")) << "\n";
    }
  });
  metrics.close();

  write_checkpoint(summary.checkpoint_path, checkpoint_from_params(cfg, tr.params));
  summary.epochs = tr.epochs;
  summary.aborted = tr.aborted;
  summary.abort_reason = tr.abort_reason;
  if (tr.aborted && log) *log << "[" << summary.run_id << "] aborted: " << tr.abort_reason << "\n";
  return summary;
}

Checkpoint checkpoint_from_params(const RunConfig& cfg, DetectorParams& params) {
  Checkpoint ckpt;
  ckpt.meta_json = cfg.to_json().dump();
  for (auto& [name, p] : params.by_name()) ckpt.tensors.emplace(name, p->value);
  return ckpt;
}

std::pair<RunConfig, DetectorParams> params_from_checkpoint(const Checkpoint& ckpt) {
  RunConfig cfg;
  try {
    cfg = RunConfig::from_json(Json::parse(ckpt.meta_json));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint meta is not valid JSON: ") + e.what());
  }
  DetectorParams params = DetectorParams::init(cfg);
  auto by_name = params.by_name();
  if (by_name.size() != ckpt.tensors.size())
    throw IoError("checkpoint param count " + std::to_string(ckpt.tensors.size()) +
                  " does not match mode '" + to_string(cfg.pipeline.mode) + "' (expected " +
                  std::to_string(by_name.size()) + ")");
  for (auto& [name, p] : by_name) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) throw IoError("checkpoint is missing param '" + name + "'");
    if (it->second.shape() != p->value.shape())
      throw IoError("checkpoint param '" + name + "' has shape " + it->second.shape_str() +
                    ", expected " + p->value.shape_str());
    p->value = it->second;
  }
  return {cfg, std::move(params)};
}

Json cmd_eval(const fs::path& checkpoint_path, const fs::path& data_dir, const std::string& split,
              const fs::path& out_dir, std::ostream* log, int jobs) {
  if (split != "train" && split != "val")
    throw ConfigError("cmd_eval: split must be 'train' or 'val', got '" + split + "'");
  auto [cfg, params] = params_from_checkpoint(read_checkpoint(checkpoint_path));
  Dataset ds = load_dataset(data_dir);
  ValEval ve = evaluate_detector(cfg, ds, split, params, jobs);

  Json j;
  j["run_id"] = run_id_of(cfg);
  j["mode"] = to_string(cfg.pipeline.mode);
  j["gate_mode"] = to_string(cfg.pipeline.gate.mode);
  j["seed"] = cfg.pipeline.seed;
  j["split"] = split;
  j["n_gts"] = ve.eval.n_gts;
  j["n_dets"] = ve.eval.n_dets;
  j["ap"] = opt_json(ve.eval.ap);
  j["ap_bins"] = opt_vec_json(ve.eval.ap_per_bin);
  j["vel_err"] = opt_json(ve.eval.mean_vel_err);
  j["gate_lidar_mean"] = opt_json(ve.gate_lidar_mean);
  j["gate_radar_mean"] = opt_json(ve.gate_radar_mean);
  j["gate_lidar_bins"] = opt_vec_json(ve.gate_lidar_bins);
  j["gate_radar_bins"] = opt_vec_json(ve.gate_radar_bins);

  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    cfg.save_file(out_dir / "config.json");
    write_text_file(out_dir / ("eval_" + split + ".json"), j.dump(2) + "\n");
  }
  if (log) *log << j.dump(2) << "\n";
  return j;
}

// ---------------------------------------------------------------------------
// Gradient-check registry
// ---------------------------------------------------------------------------

namespace {

constexpr double kGradEps = 1e-5;
constexpr double kGradTol = 1e-4;
constexpr int kGradSeeds = 5;

Tensor random_tensor(std::vector<i64> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (i64 i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

VoxelGridSpec micro_grid() {
  VoxelGridSpec g;
  g.x0 = -4.0;
  g.x1 = 4.0;
  g.y0 = -4.0;
  g.y1 = 4.0;
  g.z0 = -1.0;
  g.z1 = 3.0;
  g.dx = g.dy = 0.5;
  g.dz = 2.0;
  return g;
}

RunConfig micro_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.grid = micro_grid();
  cfg.pipeline.c1 = 3;
  cfg.pipeline.c2 = 2;
  cfg.pipeline.head_channels = 4;
  cfg.pipeline.seed = seed;
  cfg.scene.radius_min = 1.0;
  cfg.scene.radius_max = 3.0;
  return cfg;
}

std::vector<StackedPoint> random_cloud(Rng& rng, int n_lidar, int n_radar,
                                       const VoxelGridSpec& g) {
  std::vector<LidarPoint> lidar;
  for (int i = 0; i < n_lidar; ++i)
    lidar.push_back(LidarPoint{rng.uniform(g.x0, g.x1), rng.uniform(g.y0, g.y1),
                               rng.uniform(g.z0, g.z1), rng.uniform(), rng.uniform(0.0, 0.4)});
  std::vector<RadarPoint> radar;
  for (int i = 0; i < n_radar; ++i)
    radar.push_back(RadarPoint{rng.uniform(g.x0, g.x1), rng.uniform(g.y0, g.y1),
                               rng.uniform(g.z0, g.z1), rng.uniform(0.0, 12.0),
                               rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0),
                               rng.uniform(0.0, 0.3)});
  return stack_modalities(lidar, radar);
}

// Scalar probe: sum(x * C) for a fixed random C, so every output entry gets a
// distinct gradient path.
ValueId probe(Tape& tape, ValueId x, const Tensor& c) {
  return tape.sum_all(tape.mul(x, tape.constant(c)));
}

double check_linear_4x4(std::uint64_t seed) {
  Rng rng(seed);
  Param w("w", random_tensor({4, 4}, rng));
  Param b("b", random_tensor({4}, rng));
  const Tensor x = random_tensor({3, 4}, rng);
  const Tensor c = random_tensor({3, 4}, rng);
  auto build = [&](Tape& tape) {
    return probe(tape, tape.linear(tape.constant(x), tape.leaf(w), tape.leaf(b)), c);
  };
  return grad_check(build, {&w, &b}, kGradEps);
}

double check_conv_sigmoid_mul_chain(std::uint64_t seed) {
  Rng rng(seed);
  Param w1("w1", random_tensor({3, 4, 3, 3}, rng, -0.4, 0.4));
  Param b1("b1", random_tensor({3}, rng, -0.2, 0.2));
  Param w2("w2", random_tensor({3, 3, 3, 3}, rng, -0.4, 0.4));
  Param b2("b2", random_tensor({3}, rng, -0.2, 0.2));
  const Tensor x = random_tensor({1, 4, 6, 6}, rng);
  const Tensor v = random_tensor({1, 3, 6, 6}, rng);
  const Tensor c = random_tensor({1, 3, 6, 6}, rng);
  auto build = [&](Tape& tape) {
    ValueId h = tape.conv2d(tape.constant(x), tape.leaf(w1), tape.leaf(b1));
    ValueId gate = tape.sigmoid(tape.conv2d(h, tape.leaf(w2), tape.leaf(b2)));
    return probe(tape, tape.mul(gate, tape.constant(v)), c);
  };
  return grad_check(build, {&w1, &b1, &w2, &b2}, kGradEps);
}

double check_joint_encoder(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 11));
  const VoxelGridSpec grid = micro_grid();
  const std::vector<StackedPoint> cloud = random_cloud(rng, 60, 25, grid);
  const SparseVoxelGrid vgrid = voxelize(cloud, grid);
  JointEncoderParams params = JointEncoderParams::init(seed);
  Tensor c;
  {
    Tape tape;
    EncodedVoxels enc = encode_voxels(tape, vgrid, params);
    c = random_tensor(tape.val(enc.features).shape(), rng);
  }
  auto build = [&](Tape& tape) {
    EncodedVoxels enc = encode_voxels(tape, vgrid, params);
    return probe(tape, enc.features, c);
  };
  return grad_check(build, {&params.weight, &params.bias}, kGradEps);
}

double check_lidar_backbone(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 12));
  RunConfig cfg = micro_config(seed);
  cfg.pipeline.mode = DetectorMode::kFull;
  DetectorParams params = DetectorParams::init(cfg);
  const std::vector<StackedPoint> cloud = random_cloud(rng, 60, 20, cfg.grid);
  const Tensor c = random_tensor({1, cfg.pipeline.c1, cfg.grid.ny(), cfg.grid.nx()}, rng);
  auto build = [&](Tape& tape) {
    return probe(tape, lidar_stream_forward(tape, cloud, params, cfg), c);
  };
  return grad_check(build,
                    {&params.lidar_conv1_w, &params.lidar_conv1_b, &params.lidar_conv2_w,
                     &params.lidar_conv2_b, &params.encoder.weight, &params.encoder.bias},
                    kGradEps);
}

double check_radar_backbone(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 13));
  RunConfig cfg = micro_config(seed);
  cfg.pipeline.mode = DetectorMode::kFull;
  DetectorParams params = DetectorParams::init(cfg);
  const std::vector<StackedPoint> cloud = random_cloud(rng, 0, 30, cfg.grid);
  const Tensor c = random_tensor({1, cfg.pipeline.c2, cfg.grid.ny(), cfg.grid.nx()}, rng);
  auto build = [&](Tape& tape) {
    return probe(tape, radar_stream_forward(tape, cloud, params, cfg), c);
  };
  return grad_check(build,
                    {&params.radar_conv_w, &params.radar_conv_b, &params.radar_encoder.weight,
                     &params.radar_encoder.bias},
                    kGradEps);
}

double check_gate_blocks(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 14));
  GateConfig gc;
  GatedFusionParams params = GatedFusionParams::init(3, 2, gc, seed);
  Param lmap("input.lidar", random_tensor({1, 3, 6, 6}, rng));
  Param rmap("input.radar", random_tensor({1, 2, 6, 6}, rng));
  const Tensor c = random_tensor({1, 5, 6, 6}, rng);
  auto build = [&](Tape& tape) {
    GatedFuseResult gf = gated_fuse(tape, tape.leaf(lmap), tape.leaf(rmap), params, gc);
    return probe(tape, gf.fused, c);
  };
  std::vector<Param*> checked = {&params.lidar_weight, &params.lidar_bias, &params.radar_weight,
                                 &params.radar_bias, &lmap, &rmap};
  return grad_check(build, checked, kGradEps);
}

double check_head(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 15));
  RunConfig cfg = micro_config(seed);
  cfg.pipeline.mode = DetectorMode::kFull;
  DetectorParams params = DetectorParams::init(cfg);
  const Tensor fused =
      random_tensor({1, cfg.pipeline.c1 + cfg.pipeline.c2, 6, 6}, rng);
  const Tensor ch = random_tensor({1, 1, 6, 6}, rng);
  const Tensor cv = random_tensor({1, 2, 6, 6}, rng);
  auto build = [&](Tape& tape) {
    PipelineOut out;
    ValueId h = tape.relu(tape.conv2d(tape.constant(fused), tape.leaf(params.head_shared_w),
                                      tape.leaf(params.head_shared_b)));
    out.heat = tape.conv2d(h, tape.leaf(params.head_heat_w), tape.leaf(params.head_heat_b));
    out.vel = tape.conv2d(h, tape.leaf(params.head_vel_w), tape.leaf(params.head_vel_b));
    return tape.add(probe(tape, out.heat, ch), probe(tape, out.vel, cv));
  };
  return grad_check(build,
                    {&params.head_shared_w, &params.head_shared_b, &params.head_heat_w,
                     &params.head_heat_b, &params.head_vel_w, &params.head_vel_b},
                    kGradEps);
}

Scene micro_scene(std::uint64_t seed, const RunConfig& cfg) {
  Rng rng(derive_seed(seed, 16));
  Scene scene;
  scene.seed = seed;
  scene.gts.push_back(GtBox{-1.6, 0.8, 1.2, -0.5, 1.2, 2.0});
  scene.gts.push_back(GtBox{1.9, -1.4, -0.8, 0.9, 1.0, 1.8});

  for (int k = 0; k < 2; ++k) {
    LidarSweep sweep;
    sweep.time_offset = 0.05 * k;
    sweep.pose = k == 0 ? Pose2{} : Pose2{0.25, 0.0, 0.0};
    for (int i = 0; i < 40; ++i)
      sweep.points.push_back(LidarPoint{rng.uniform(cfg.grid.x0, cfg.grid.x1),
                                        rng.uniform(cfg.grid.y0, cfg.grid.y1),
                                        rng.uniform(cfg.grid.z0, cfg.grid.z1), rng.uniform(),
                                        0.0});
    scene.lidar_sweeps.push_back(std::move(sweep));
  }
  for (int k = 0; k < 2; ++k) {
    RadarSweep sweep;
    sweep.time_offset = 0.05 * k;
    sweep.pose = k == 0 ? Pose2{} : Pose2{0.25, 0.0, 0.0};
    for (int i = 0; i < 12; ++i)
      sweep.points.push_back(RadarPoint{rng.uniform(cfg.grid.x0, cfg.grid.x1),
                                        rng.uniform(cfg.grid.y0, cfg.grid.y1),
                                        rng.uniform(cfg.grid.z0, cfg.grid.z1),
                                        rng.uniform(0.0, 12.0), rng.uniform(-4.0, 4.0),
                                        rng.uniform(-4.0, 4.0), 0.0});
    scene.radar_sweeps.push_back(std::move(sweep));
  }
  return scene;
}

double check_end_to_end(std::uint64_t seed) {
  RunConfig cfg = micro_config(seed);
  cfg.pipeline.mode = DetectorMode::kFull;
  DetectorParams params = DetectorParams::init(cfg);
  const Scene scene = micro_scene(seed, cfg);
  const SceneInput input = build_scene_input(scene, cfg);
  auto build = [&](Tape& tape) {
    PipelineOut out = pipeline_forward(tape, input, params, cfg);
    return compute_loss(tape, out, scene.gts, cfg);
  };
  std::vector<Param*> checked = {&params.encoder.weight, &params.encoder.bias};
  for (Param* p : params.gate.all()) checked.push_back(p);
  return grad_check(build, checked, kGradEps);
}

struct NamedCheck {
  const char* name;
  double (*fn)(std::uint64_t);
};

constexpr NamedCheck kChecks[] = {
    {"linear_4x4", check_linear_4x4},
    {"conv_sigmoid_mul_chain", check_conv_sigmoid_mul_chain},
    {"joint_encoder", check_joint_encoder},
    {"lidar_backbone_convs", check_lidar_backbone},
    {"radar_backbone_conv", check_radar_backbone},
    {"gate_conv_blocks", check_gate_blocks},
    {"detection_head", check_head},
    {"end_to_end_micro", check_end_to_end},
};

}  // namespace

Json GradCheckReport::to_json() const {
  Json j;
  j["tolerance"] = tolerance;
  j["eps"] = kGradEps;
  j["seeds"] = kGradSeeds;
  j["all_pass"] = all_pass;
  j["seconds"] = seconds;
  Json arr = Json::array();
  for (const Entry& e : entries)
    arr.push_back(Json{{"name", e.name}, {"max_rel_err", e.max_rel_err}, {"pass", e.pass}});
  j["checks"] = std::move(arr);
  return j;
}

GradCheckReport cmd_gradcheck(std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  GradCheckReport report;
  report.tolerance = kGradTol;
  report.all_pass = true;
  for (const NamedCheck& check : kChecks) {
    GradCheckReport::Entry entry;
    entry.name = check.name;
    for (int s = 0; s < kGradSeeds; ++s)
      entry.max_rel_err =
          std::max(entry.max_rel_err, check.fn(derive_seed(1000, static_cast<std::uint64_t>(s))));
    entry.pass = entry.max_rel_err < kGradTol;
    report.all_pass = report.all_pass && entry.pass;
    report.entries.push_back(entry);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (log) *log << report.to_json().dump(2) << "\n";
  return report;
}

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

Json AblationReport::to_json() const {
  Json arr = Json::array();
  for (const AblationRow& r : rows) {
    Json j;
    j["name"] = r.name;
    j["mode"] = to_string(r.mode);
    j["gate_mode"] = r.gated ? Json(to_string(r.gate_mode)) : Json(nullptr);
    j["ap"] = opt_json(r.final_rec.val_ap);
    j["ap_bins"] = opt_vec_json(r.final_rec.val_ap_bins);
    j["vel_err"] = opt_json(r.final_rec.val_vel_err);
    j["gate_lidar_mean"] = opt_json(r.final_rec.gate_lidar_mean);
    j["gate_radar_mean"] = opt_json(r.final_rec.gate_radar_mean);
    j["gate_radar_bins"] = opt_vec_json(r.final_rec.gate_radar_bins);
    j["loss"] = r.final_rec.mean_loss;
    arr.push_back(std::move(j));
  }
  return Json{{"rows", std::move(arr)}};
}

std::string AblationReport::table_text() const {
  std::ostringstream os;
  os << std::left << std::setw(16) << "run" << std::setw(18) << "gate" << std::right
     << std::setw(8) << "AP" << std::setw(10) << "AP[near]" << std::setw(10) << "AP[mid]"
     << std::setw(10) << "AP[far]" << std::setw(9) << "velErr" << std::setw(8) << "w_lid"
     << std::setw(8) << "w_rad" << "\n";
  for (const AblationRow& r : rows) {
    os << std::left << std::setw(16) << r.name << std::setw(18)
       << (r.gated ? to_string(r.gate_mode) : std::string("-")) << std::right;
    os << fmt_opt(r.final_rec.val_ap);
    for (int b = 0; b < 3; ++b) {
      std::optional<double> v;
      if (static_cast<std::size_t>(b) < r.final_rec.val_ap_bins.size())
        v = r.final_rec.val_ap_bins[static_cast<std::size_t>(b)];
      os << fmt_opt(v, 10);
    }
    os << fmt_opt(r.final_rec.val_vel_err, 9) << fmt_opt(r.final_rec.gate_lidar_mean, 8)
       << fmt_opt(r.final_rec.gate_radar_mean, 8) << "\n";
  }
  return os.str();
}

const AblationRow& AblationReport::row(const std::string& name) const {
  for (const AblationRow& r : rows)
    if (r.name == name) return r;
  throw ContractError("ablation report has no row '" + name + "'");
}

AblationReport cmd_ablate(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir,
                          std::ostream* log) {
  cfg.validate();
  ensure_dir(out_dir);

  struct RunSpec {
    const char* name;
    DetectorMode mode;
    GateMode gate;
  };
  const RunSpec specs[] = {
      {"LO", DetectorMode::kLidarOnly, GateMode::kChannelSpecific},
      {"LR_EARLY_ONLY", DetectorMode::kEarlyOnly, GateMode::kChannelSpecific},
      {"LR_MIDDLE_ONLY", DetectorMode::kMiddleOnly, GateMode::kChannelSpecific},
      {"LR_FULL", DetectorMode::kFull, GateMode::kChannelSpecific},
      {"LR_FULL_CONST", DetectorMode::kFull, GateMode::kChannelConstant},
  };

  AblationReport report;
  for (const RunSpec& spec : specs) {
    RunConfig rc = cfg;
    rc.pipeline.mode = spec.mode;
    rc.pipeline.gate.mode = spec.gate;
    if (log) *log << "ablate: training " << spec.name << "\n";
    TrainSummary summary = cmd_train(rc, data_dir, out_dir / ("run_" + std::string(spec.name)), log);
    AblationRow row;
    row.name = spec.name;
    row.mode = spec.mode;
    row.gate_mode = spec.gate;
    row.gated = mode_has_gate(spec.mode);
    row.final_rec = summary.final_epoch();
    report.rows.push_back(std::move(row));
  }

  write_text_file(out_dir / "ablation.json", report.to_json().dump(2) + "\n");
  write_text_file(out_dir / "ablation_table.txt", report.table_text());
  if (log) *log << report.table_text();
  return report;
}

void cmd_export_weights(const fs::path& checkpoint_path, const fs::path& data_dir, int scene_id,
                        const fs::path& out_dir, std::ostream* log) {
  auto [cfg, params] = params_from_checkpoint(read_checkpoint(checkpoint_path));
  if (!mode_has_gate(cfg.pipeline.mode))
    throw ConfigError("cmd_export_weights: checkpoint mode " + to_string(cfg.pipeline.mode) +
                      " has no gate");
  Dataset ds = load_dataset(data_dir);
  const Scene* scene = nullptr;
  for (const Scene& s : ds.scenes)
    if (s.id == scene_id) scene = &s;
  if (!scene) throw InputError("cmd_export_weights: no scene with id " + std::to_string(scene_id));

  Tape tape;
  SceneInput input = build_scene_input(*scene, cfg);
  PipelineOut out = pipeline_forward(tape, input, params, cfg);
  if (!out.gate) throw ContractError("cmd_export_weights: forward produced no gate weights");

  ensure_dir(out_dir);
  cfg.save_file(out_dir / "config.json");
  const Tensor wl = export_weight_map(tape.val(out.gate->lidar_weights));
  const Tensor wr = export_weight_map(tape.val(out.gate->radar_weights));
  write_pgm(out_dir / "lidar_weights.pgm", wl);
  write_csv(out_dir / "lidar_weights.csv", wl);
  write_pgm(out_dir / "radar_weights.pgm", wr);
  write_csv(out_dir / "radar_weights.csv", wr);
  if (log)
    *log << "wrote gate weight maps for scene " << scene_id << " to " << out_dir.string() << "\n";
}

}  // namespace lrf
