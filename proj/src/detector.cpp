#include "lrf/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lrf {

namespace {

using i64 = std::int64_t;

struct FlaggedDet {
  double score = 0;
  bool tp = false;
  double vel_err = 0;
};

}  // namespace

DetectorParams DetectorParams::init(const RunConfig& cfg) {
  const PipelineSettings& p = cfg.pipeline;
  const std::uint64_t seed = p.seed;
  const i64 nz = cfg.grid.nz();

  DetectorParams d;
  d.mode = p.mode;
  d.encoder = JointEncoderParams::init(seed, "encoder");
  d.lidar_conv1_w = make_conv_param("lidar.conv1.weight", p.c1, 9 * nz, 3, seed);
  d.lidar_conv1_b = make_bias_param("lidar.conv1.bias", p.c1);
  d.lidar_conv2_w = make_conv_param("lidar.conv2.weight", p.c1, p.c1, 3, seed);
  d.lidar_conv2_b = make_bias_param("lidar.conv2.bias", p.c1);

  if (mode_has_radar_stream(p.mode)) {
    d.radar_encoder = JointEncoderParams::init(seed, "radar_encoder");
    d.radar_conv_w = make_conv_param("radar.conv1.weight", p.c2, 9, 3, seed);
    d.radar_conv_b = make_bias_param("radar.conv1.bias", p.c2);
  }
  if (mode_has_gate(p.mode)) d.gate = GatedFusionParams::init(p.c1, p.c2, p.gate, seed);

  const i64 head_in = p.mode == DetectorMode::kLidarOnly ? p.c1 : p.c1 + p.c2;
  d.head_shared_w = make_conv_param("head.shared.weight", p.head_channels, head_in, 3, seed);
  d.head_shared_b = make_bias_param("head.shared.bias", p.head_channels);
  d.head_heat_w = make_conv_param("head.heat.weight", 1, p.head_channels, 1, seed);
  d.head_heat_b = make_bias_param("head.heat.bias", 1);
  d.head_vel_w = make_conv_param("head.vel.weight", 2, p.head_channels, 1, seed);
  d.head_vel_b = make_bias_param("head.vel.bias", 2);
  return d;
}

std::vector<Param*> DetectorParams::all() {
  std::vector<Param*> out = {&encoder.weight, &encoder.bias, &lidar_conv1_w, &lidar_conv1_b,
                             &lidar_conv2_w, &lidar_conv2_b};
  if (mode_has_radar_stream(mode)) {
    out.push_back(&radar_encoder.weight);
    out.push_back(&radar_encoder.bias);
    out.push_back(&radar_conv_w);
    out.push_back(&radar_conv_b);
  }
  if (mode_has_gate(mode)) {
    for (Param* p : gate.all()) out.push_back(p);
  }
  out.push_back(&head_shared_w);
  out.push_back(&head_shared_b);
  out.push_back(&head_heat_w);
  out.push_back(&head_heat_b);
  out.push_back(&head_vel_w);
  out.push_back(&head_vel_b);
  return out;
}

std::map<std::string, Param*> DetectorParams::by_name() {
  std::map<std::string, Param*> m;
  for (Param* p : all()) m.emplace(p->name, p);
  return m;
}

SceneInput build_scene_input(const Scene& scene, const RunConfig& cfg) {
  SceneInput input;
  const std::vector<LidarPoint> lidar =
      accumulate_sweeps(scene.lidar_sweeps, cfg.pipeline.max_lidar_sweeps);
  std::vector<RadarPoint> radar;
  if (mode_has_radar_stream(cfg.pipeline.mode) || mode_has_early_fusion(cfg.pipeline.mode))
    radar = accumulate_sweeps(scene.radar_sweeps, cfg.pipeline.max_radar_sweeps);

  if (mode_has_early_fusion(cfg.pipeline.mode))
    input.lidar_stream_cloud = stack_modalities(lidar, radar);
  else
    input.lidar_stream_cloud = stack_modalities(lidar, {});

  if (mode_has_radar_stream(cfg.pipeline.mode))
    input.radar_cloud = stack_modalities({}, radar);
  return input;
}

ValueId lidar_stream_forward(Tape& tape, const std::vector<StackedPoint>& cloud,
                             DetectorParams& params, const RunConfig& cfg) {
  const VoxelGridSpec& grid = cfg.grid;
  SparseVoxelGrid vgrid = voxelize(cloud, grid);
  EncodedVoxels encoded = encode_voxels(tape, vgrid, params.encoder);
  ValueId bev = scatter_to_bev(tape, encoded, grid, ScatterMode::kZSlice);
  ValueId x = tape.reshape(bev, {1, 9 * grid.nz(), grid.ny(), grid.nx()});
  x = tape.relu(tape.conv2d(x, tape.leaf(params.lidar_conv1_w), tape.leaf(params.lidar_conv1_b)));
  x = tape.relu(tape.conv2d(x, tape.leaf(params.lidar_conv2_w), tape.leaf(params.lidar_conv2_b)));
  return x;
}

ValueId radar_stream_forward(Tape& tape, const std::vector<StackedPoint>& cloud,
                             DetectorParams& params, const RunConfig& cfg) {
  const VoxelGridSpec pillar = cfg.grid.pillar_spec();
  SparseVoxelGrid vgrid = voxelize(cloud, pillar);
  EncodedVoxels encoded = encode_voxels(tape, vgrid, params.radar_encoder);
  ValueId bev = scatter_to_bev(tape, encoded, pillar, ScatterMode::kPillar);
  ValueId x = tape.reshape(bev, {1, 9, pillar.ny(), pillar.nx()});
  x = tape.relu(tape.conv2d(x, tape.leaf(params.radar_conv_w), tape.leaf(params.radar_conv_b)));
  return x;
}

namespace {

void head_forward(Tape& tape, ValueId fused, DetectorParams& params, PipelineOut& out) {
  ValueId h = tape.relu(
      tape.conv2d(fused, tape.leaf(params.head_shared_w), tape.leaf(params.head_shared_b)));
  out.heat = tape.conv2d(h, tape.leaf(params.head_heat_w), tape.leaf(params.head_heat_b));
  out.vel = tape.conv2d(h, tape.leaf(params.head_vel_w), tape.leaf(params.head_vel_b));
}

}  // namespace

PipelineOut pipeline_forward(Tape& tape, const SceneInput& input, DetectorParams& params,
                             const RunConfig& cfg) {
  PipelineOut out;
  out.lidar_map = lidar_stream_forward(tape, input.lidar_stream_cloud, params, cfg);

  switch (cfg.pipeline.mode) {
    case DetectorMode::kLidarOnly:
      out.fused = out.lidar_map;
      break;
    case DetectorMode::kEarlyOnly:
      out.radar_map = radar_stream_forward(tape, input.radar_cloud, params, cfg);
      out.fused = tape.concat_channels(out.lidar_map, out.radar_map);
      break;
    case DetectorMode::kMiddleOnly:
    case DetectorMode::kFull: {
      out.radar_map = radar_stream_forward(tape, input.radar_cloud, params, cfg);
      out.gate = gated_fuse(tape, out.lidar_map, out.radar_map, params.gate, cfg.pipeline.gate);
      out.fused = out.gate->fused;
      break;
    }
  }
  head_forward(tape, out.fused, params, out);
  return out;
}

Tensor build_heat_target(const std::vector<GtBox>& gts, const VoxelGridSpec& grid) {
  const i64 H = grid.ny(), W = grid.nx();
  Tensor target({1, 1, H, W});
  for (const GtBox& gt : gts) {
    const double cxf = (gt.x - grid.x0) / grid.dx;
    const double cyf = (gt.y - grid.y0) / grid.dy;
    const double extent_cells = std::max(gt.wx / grid.dx, gt.wy / grid.dy);
    const double sigma = std::max(1.0, 0.5 * extent_cells);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (i64 h = 0; h < H; ++h) {
      const double dy = static_cast<double>(h) + 0.5 - cyf;
      for (i64 w = 0; w < W; ++w) {
        const double dx = static_cast<double>(w) + 0.5 - cxf;
        const double v = std::exp(-(dx * dx + dy * dy) * inv2s2);
        double& cell = target.at(0, 0, h, w);
        if (v > cell) cell = v;
      }
    }
  }
  return target;
}

ValueId compute_loss(Tape& tape, const PipelineOut& out, const std::vector<GtBox>& gts,
                     const RunConfig& cfg) {
  return compute_loss(tape, out, gts, cfg, build_heat_target(gts, cfg.grid));
}

ValueId compute_loss(Tape& tape, const PipelineOut& out, const std::vector<GtBox>& gts,
                     const RunConfig& cfg, Tensor heat_target) {
  const VoxelGridSpec& grid = cfg.grid;
  for (const GtBox& gt : gts) {
    if (gt.x < grid.x0 || gt.x >= grid.x1 || gt.y < grid.y0 || gt.y >= grid.y1)
      throw InputError("compute_loss: ground-truth box outside the grid range");
  }

  ValueId target = tape.constant(std::move(heat_target));
  ValueId diff = tape.sub(tape.sigmoid(out.heat), target);
  ValueId loss = tape.mean_all(tape.mul(diff, diff));

  if (!gts.empty()) {
    const i64 H = grid.ny(), W = grid.nx();
    std::vector<i64> idx;
    std::vector<double> truth;
    idx.reserve(gts.size() * 2);
    for (const GtBox& gt : gts) {
      const i64 ix = static_cast<i64>(std::floor((gt.x - grid.x0) / grid.dx));
      const i64 iy = static_cast<i64>(std::floor((gt.y - grid.y0) / grid.dy));
      idx.push_back((0 * H + iy) * W + ix);
      idx.push_back((1 * H + iy) * W + ix);
      truth.push_back(gt.vx);
      truth.push_back(gt.vy);
    }
    ValueId picked = tape.gather(out.vel, std::move(idx));
    const i64 n_truth = static_cast<i64>(truth.size());
    ValueId gtv = tape.constant(Tensor({n_truth}, std::move(truth)));
    ValueId l1 = tape.mean_all(tape.abs(tape.sub(picked, gtv)));
    loss = tape.add(loss, tape.scale(l1, cfg.pipeline.lambda_vel));
  }
  return loss;
}

namespace {

// Accepts (H,W), (1,H,W), (1,...,H,W): all leading extents must be 1.
const double* plane_view(const Tensor& t, i64 planes, const char* what) {
  i64 lead = 1;
  for (i64 i = 0; i + 2 < t.rank(); ++i) lead *= t.extent(i);
  if (t.rank() < 2 || lead != planes)
    throw DimError(std::string(what) + ": unexpected shape " + t.shape_str());
  return t.data();
}

}  // namespace

std::vector<DetectionBox> decode_detections(const Tensor& heat_logits, const Tensor& vel,
                                            const VoxelGridSpec& grid, double score_threshold,
                                            int window) {
  if (window < 1 || window % 2 == 0)
    throw ConfigError("decode_detections: peak window must be odd, got " + std::to_string(window));
  const i64 H = heat_logits.extent(heat_logits.rank() - 2);
  const i64 W = heat_logits.extent(heat_logits.rank() - 1);
  const double* heat = plane_view(heat_logits, 1, "decode heatmap");
  const double* velp = plane_view(vel, 2, "decode velocity");
  if (vel.extent(vel.rank() - 2) != H || vel.extent(vel.rank() - 1) != W)
    throw DimError("decode_detections: velocity map " + vel.shape_str() +
                   " does not match heatmap " + heat_logits.shape_str());

  const int r = window / 2;
  std::vector<DetectionBox> dets;
  for (i64 h = 0; h < H; ++h) {
    for (i64 w = 0; w < W; ++w) {
      const double logit = heat[h * W + w];
      const double score = 1.0 / (1.0 + std::exp(-logit));
      if (!(score > score_threshold)) continue;

      bool is_peak = true;
      const i64 me = h * W + w;
      for (i64 nh = std::max<i64>(0, h - r); is_peak && nh <= std::min<i64>(H - 1, h + r); ++nh) {
        for (i64 nw = std::max<i64>(0, w - r); nw <= std::min<i64>(W - 1, w + r); ++nw) {
          const i64 other = nh * W + nw;
          if (other == me) continue;
          const double ov = heat[other];
          if (ov > logit || (ov == logit && other < me)) {
            is_peak = false;
            break;
          }
        }
      }
      if (!is_peak) continue;

      DetectionBox box;
      box.x = grid.cell_center_x(w);
      box.y = grid.cell_center_y(h);
      box.vx = velp[0 * H * W + h * W + w];
      box.vy = velp[1 * H * W + h * W + w];
      box.score = score;
      dets.push_back(box);
    }
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const DetectionBox& a, const DetectionBox& b) { return a.score > b.score; });
  return dets;
}

namespace {

// Greedy matching within one scene; returns per-detection flags in
// descending-score order.
std::vector<FlaggedDet> match_scene(const std::vector<DetectionBox>& dets,
                                    const std::vector<GtBox>& gts, double match_radius) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<bool> taken(gts.size(), false);
  std::vector<FlaggedDet> flags;
  flags.reserve(dets.size());
  for (std::size_t oi : order) {
    const DetectionBox& det = dets[oi];
    double best = match_radius;
    std::size_t best_gt = gts.size();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi]) continue;
      const double dist = std::hypot(det.x - gts[gi].x, det.y - gts[gi].y);
      if (dist <= best) {
        best = dist;
        best_gt = gi;
      }
    }
    FlaggedDet f;
    f.score = det.score;
    if (best_gt < gts.size()) {
      taken[best_gt] = true;
      f.tp = true;
      f.vel_err = std::hypot(det.vx - gts[best_gt].vx, det.vy - gts[best_gt].vy);
    }
    flags.push_back(f);
  }
  return flags;
}

// All-point-interpolated area under the precision-recall curve.
std::optional<double> ap_from_flags(std::vector<FlaggedDet> flags, i64 n_gts) {
  if (n_gts == 0) return std::nullopt;
  std::stable_sort(flags.begin(), flags.end(),
                   [](const FlaggedDet& a, const FlaggedDet& b) { return a.score > b.score; });
  const std::size_t n = flags.size();
  if (n == 0) return 0.0;

  std::vector<double> precision(n), recall(n);
  i64 tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (flags[k].tp) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gts);
  }
  // Precision envelope: best precision at recall >= r.
  for (std::size_t k = n - 1; k-- > 0;) precision[k] = std::max(precision[k], precision[k + 1]);

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

bool in_bin(double range, const RangeBin& bin) { return range >= bin.lo && range < bin.hi; }

}  // namespace

EvalResult evaluate_scenes(const std::vector<std::vector<DetectionBox>>& dets_per_scene,
                           const std::vector<std::vector<GtBox>>& gts_per_scene,
                           double match_radius, const std::vector<RangeBin>& bins) {
  if (dets_per_scene.size() != gts_per_scene.size())
    throw ContractError("evaluate_scenes: detections and ground truths differ in scene count");

  std::vector<FlaggedDet> pooled;
  i64 total_gts = 0;
  for (std::size_t s = 0; s < dets_per_scene.size(); ++s) {
    std::vector<FlaggedDet> flags = match_scene(dets_per_scene[s], gts_per_scene[s], match_radius);
    pooled.insert(pooled.end(), flags.begin(), flags.end());
    total_gts += static_cast<i64>(gts_per_scene[s].size());
  }

  EvalResult result;
  result.n_gts = static_cast<int>(total_gts);
  result.n_dets = static_cast<int>(pooled.size());
  result.ap = ap_from_flags(pooled, total_gts);

  double vel_sum = 0.0;
  i64 vel_n = 0;
  for (const FlaggedDet& f : pooled)
    if (f.tp) {
      vel_sum += f.vel_err;
      ++vel_n;
    }
  if (vel_n > 0) result.mean_vel_err = vel_sum / static_cast<double>(vel_n);

  result.ap_per_bin.resize(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    std::vector<FlaggedDet> bin_pooled;
    i64 bin_gts = 0;
    for (std::size_t s = 0; s < dets_per_scene.size(); ++s) {
      std::vector<DetectionBox> dets_bin;
      std::vector<GtBox> gts_bin;
      for (const DetectionBox& d : dets_per_scene[s])
        if (in_bin(std::hypot(d.x, d.y), bins[b])) dets_bin.push_back(d);
      for (const GtBox& g : gts_per_scene[s])
        if (in_bin(g.range(), bins[b])) gts_bin.push_back(g);
      std::vector<FlaggedDet> flags = match_scene(dets_bin, gts_bin, match_radius);
      bin_pooled.insert(bin_pooled.end(), flags.begin(), flags.end());
      bin_gts += static_cast<i64>(gts_bin.size());
    }
    result.ap_per_bin[b] = ap_from_flags(bin_pooled, bin_gts);
  }
  return result;
}

EvalResult evaluate(const std::vector<DetectionBox>& dets, const std::vector<GtBox>& gts,
                    double match_radius, const std::vector<RangeBin>& bins) {
  return evaluate_scenes({dets}, {gts}, match_radius, bins);
}

namespace {

struct BinAverager {
  std::vector<double> sums;
  std::vector<i64> counts;

  void init(std::size_t n) {
    sums.assign(n, 0.0);
    counts.assign(n, 0);
  }
  void add(const std::vector<std::optional<double>>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      if (vals[i]) {
        sums[i] += *vals[i];
        ++counts[i];
      }
  }
  std::vector<std::optional<double>> result() const {
    std::vector<std::optional<double>> out(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i)
      if (counts[i] > 0) out[i] = sums[i] / static_cast<double>(counts[i]);
    return out;
  }
};

}  // namespace

ValEval evaluate_detector(const RunConfig& cfg, const Dataset& dataset, const std::string& split,
                          DetectorParams& params, int jobs) {
  const std::vector<std::size_t> indices = dataset.split_indices(split);
  const std::size_t n = indices.size();

  std::vector<std::vector<DetectionBox>> dets(n);
  std::vector<std::vector<GtBox>> gts(n);
  std::vector<std::optional<double>> wl_means(n), wr_means(n);
  std::vector<std::vector<std::optional<double>>> wl_bins(n), wr_bins(n);

#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1) if (jobs > 1)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const Scene& scene = dataset.scenes[indices[static_cast<std::size_t>(ii)]];
    Tape tape;
    SceneInput input = build_scene_input(scene, cfg);
    PipelineOut out = pipeline_forward(tape, input, params, cfg);
    dets[static_cast<std::size_t>(ii)] =
        decode_detections(tape.val(out.heat), tape.val(out.vel), cfg.grid,
                          cfg.eval.score_threshold, cfg.eval.peak_window);
    gts[static_cast<std::size_t>(ii)] = scene.gts;
    if (out.gate) {
      WeightStats sl = gate_stats(tape.val(out.gate->lidar_weights), cfg.eval.range_bins, cfg.grid);
      WeightStats sr = gate_stats(tape.val(out.gate->radar_weights), cfg.eval.range_bins, cfg.grid);
      wl_means[static_cast<std::size_t>(ii)] = sl.overall;
      wr_means[static_cast<std::size_t>(ii)] = sr.overall;
      wl_bins[static_cast<std::size_t>(ii)] = sl.per_bin;
      wr_bins[static_cast<std::size_t>(ii)] = sr.per_bin;
    }
  }

  ValEval ve;
  ve.eval = evaluate_scenes(dets, gts, cfg.eval.match_radius, cfg.eval.range_bins);

  double wl_sum = 0, wr_sum = 0;
  i64 w_n = 0;
  BinAverager bl, br;
  bl.init(cfg.eval.range_bins.size());
  br.init(cfg.eval.range_bins.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (wl_means[i] && wr_means[i]) {
      wl_sum += *wl_means[i];
      wr_sum += *wr_means[i];
      ++w_n;
      bl.add(wl_bins[i]);
      br.add(wr_bins[i]);
    }
  }
  if (w_n > 0) {
    ve.gate_lidar_mean = wl_sum / static_cast<double>(w_n);
    ve.gate_radar_mean = wr_sum / static_cast<double>(w_n);
    ve.gate_lidar_bins = bl.result();
    ve.gate_radar_bins = br.result();
  }
  return ve;
}

namespace {

std::vector<Tensor> snapshot_values(std::vector<Param*>& params) {
  std::vector<Tensor> vals;
  vals.reserve(params.size());
  for (Param* p : params) vals.push_back(p->value);
  return vals;
}

void restore_values(std::vector<Param*>& params, const std::vector<Tensor>& vals) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = vals[i];
}

}  // namespace

TrainResult train_detector(const RunConfig& cfg, const Dataset& dataset,
                           const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  const PipelineSettings& ps = cfg.pipeline;

  TrainResult result;
  result.params = DetectorParams::init(cfg);
  std::vector<Param*> params = result.params.all();

  SgdOptimizer optim(OptimConfig{ps.lr, ps.use_momentum, ps.momentum});
  Rng shuffle_rng(derive_seed(ps.seed, hash64("shuffle")));

  const std::vector<std::size_t> train_idx = dataset.split_indices("train");

  // Inputs and heat targets are parameter-independent; build them once.
  std::vector<SceneInput> inputs(train_idx.size());
  std::vector<Tensor> targets(train_idx.size());
  for (std::size_t i = 0; i < train_idx.size(); ++i) {
    const Scene& scene = dataset.scenes[train_idx[i]];
    inputs[i] = build_scene_input(scene, cfg);
    targets[i] = build_heat_target(scene.gts, cfg.grid);
  }

  std::vector<std::size_t> order(train_idx.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < ps.epochs; ++epoch) {
    // Fisher-Yates from the dedicated shuffle stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.below(i));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    std::size_t loss_n = 0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch =
          std::min<std::size_t>(static_cast<std::size_t>(ps.batch_size), order.size() - cursor);
      const std::vector<Tensor> before = snapshot_values(params);
      for (Param* p : params) p->zero_grad();

      bool finite = true;
      for (std::size_t bi = 0; bi < batch; ++bi) {
        const std::size_t si = order[cursor + bi];
        const Scene& scene = dataset.scenes[train_idx[si]];
        Tape tape;
        PipelineOut out = pipeline_forward(tape, inputs[si], result.params, cfg);
        ValueId loss = compute_loss(tape, out, scene.gts, cfg, targets[si]);
        const double loss_value = tape.val(loss)[0];
        if (!std::isfinite(loss_value)) {
          finite = false;
          break;
        }
        loss_sum += loss_value;
        ++loss_n;
        tape.backward(tape.scale(loss, 1.0 / static_cast<double>(batch)));
      }

      if (!finite) {
        restore_values(params, before);
        result.aborted = true;
        result.abort_reason = "non-finite loss at epoch " + std::to_string(epoch);
        return result;
      }
      try {
        optim.step(params);
      } catch (const NumericError& e) {
        restore_values(params, before);
        result.aborted = true;
        result.abort_reason = e.what();
        return result;
      }
      cursor += batch;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0;
    ValEval ve = evaluate_detector(cfg, dataset, "val", result.params);
    rec.val_ap = ve.eval.ap;
    rec.val_vel_err = ve.eval.mean_vel_err;
    rec.val_ap_bins = ve.eval.ap_per_bin;
    rec.gate_lidar_mean = ve.gate_lidar_mean;
    rec.gate_radar_mean = ve.gate_radar_mean;
    rec.gate_lidar_bins = ve.gate_lidar_bins;
    rec.gate_radar_bins = ve.gate_radar_bins;
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

}  // namespace lrf
