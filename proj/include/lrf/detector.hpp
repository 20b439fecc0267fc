#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lrf/config.hpp"
#include "lrf/dataset.hpp"
#include "lrf/fusion.hpp"
#include "lrf/optim.hpp"
#include "lrf/voxel.hpp"

namespace lrf {

struct DetectionBox {
  double x = 0, y = 0;
  double vx = 0, vy = 0;
  double score = 0;  // sigmoid of the heatmap logit, in (0,1)
};

/// Every learnable tensor of the pipeline; which members are registered
/// depends on the mode (LO drops the radar stream and gate, EARLY drops the
/// gate). Initialization derives per-param streams from (seed, name), so a
/// given param initializes identically in every mode.
struct DetectorParams {
  DetectorMode mode = DetectorMode::kFull;
  JointEncoderParams encoder;        // lidar-stream joint encoder
  JointEncoderParams radar_encoder;  // radar-stream encoder (own 4x4 layer)
  Param lidar_conv1_w, lidar_conv1_b;
  Param lidar_conv2_w, lidar_conv2_b;
  Param radar_conv_w, radar_conv_b;
  GatedFusionParams gate;
  Param head_shared_w, head_shared_b;
  Param head_heat_w, head_heat_b;
  Param head_vel_w, head_vel_b;

  static DetectorParams init(const RunConfig& cfg);

  /// Registered params in a fixed order (checkpoint + optimizer order).
  std::vector<Param*> all();
  std::map<std::string, Param*> by_name();
};

/// Mode-shaped point clouds for one scene: the lidar-stream cloud contains
/// stacked radar points only when early fusion is on; the radar cloud is
/// empty in LO mode.
struct SceneInput {
  std::vector<StackedPoint> lidar_stream_cloud;
  std::vector<StackedPoint> radar_cloud;
};

SceneInput build_scene_input(const Scene& scene, const RunConfig& cfg);

struct PipelineOut {
  ValueId lidar_map = -1;   // (1,C1,H,W)
  ValueId radar_map = -1;   // (1,C2,H,W), -1 in LO mode
  ValueId fused = -1;       // head input
  ValueId heat = -1;        // (1,1,H,W) logits
  ValueId vel = -1;         // (1,2,H,W)
  std::optional<GatedFuseResult> gate;
};

ValueId lidar_stream_forward(Tape& tape, const std::vector<StackedPoint>& cloud,
                             DetectorParams& params, const RunConfig& cfg);
ValueId radar_stream_forward(Tape& tape, const std::vector<StackedPoint>& cloud,
                             DetectorParams& params, const RunConfig& cfg);
PipelineOut pipeline_forward(Tape& tape, const SceneInput& input, DetectorParams& params,
                             const RunConfig& cfg);

/// Heatmap target: per ground truth a Gaussian splat with sigma = max(1 cell,
/// half the footprint extent in cells), combined across objects by max.
Tensor build_heat_target(const std::vector<GtBox>& gts, const VoxelGridSpec& grid);

/// MSE(sigmoid(heat), target) + lambda * mean L1 of the velocity channels at
/// the ground-truth center cells (zero when there are no boxes). Ground truth
/// must lie inside the grid range. The second form takes a pre-built heat
/// target (the training loop caches those per scene).
ValueId compute_loss(Tape& tape, const PipelineOut& out, const std::vector<GtBox>& gts,
                     const RunConfig& cfg);
ValueId compute_loss(Tape& tape, const PipelineOut& out, const std::vector<GtBox>& gts,
                     const RunConfig& cfg, Tensor heat_target);

/// Peak decoding: a cell is a detection iff sigmoid(logit) > threshold and it
/// beats every cell of its window x window neighborhood (ties broken toward
/// the smaller row-major index). Sorted by descending score.
std::vector<DetectionBox> decode_detections(const Tensor& heat_logits, const Tensor& vel,
                                            const VoxelGridSpec& grid, double score_threshold,
                                            int window);

struct EvalResult {
  std::optional<double> ap;            // absent when there are no ground truths
  std::optional<double> mean_vel_err;  // absent when nothing matched
  std::vector<std::optional<double>> ap_per_bin;
  int n_gts = 0;
  int n_dets = 0;
};

/// Greedy center-distance matching in score order (each gt used at most
/// once), all-point-interpolated AP, mean matched velocity error, and
/// range-binned AP (both dets and gts filtered by the bin).
EvalResult evaluate(const std::vector<DetectionBox>& dets, const std::vector<GtBox>& gts,
                    double match_radius, const std::vector<RangeBin>& bins);

/// Pooled evaluation across scenes: matching is per scene, the PR curve pools
/// all detections by score.
EvalResult evaluate_scenes(const std::vector<std::vector<DetectionBox>>& dets_per_scene,
                           const std::vector<std::vector<GtBox>>& gts_per_scene,
                           double match_radius, const std::vector<RangeBin>& bins);

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0;
  std::optional<double> val_ap;
  std::optional<double> val_vel_err;
  std::vector<std::optional<double>> val_ap_bins;
  std::optional<double> gate_lidar_mean;
  std::optional<double> gate_radar_mean;
  std::vector<std::optional<double>> gate_lidar_bins;
  std::vector<std::optional<double>> gate_radar_bins;
};

struct TrainResult {
  DetectorParams params;
  std::vector<EpochRecord> epochs;
  bool aborted = false;
  std::string abort_reason;
};

/// Deterministic SGD loop over the train split with per-epoch validation.
/// A non-finite loss or gradient aborts and returns the params from before
/// the offending step.
TrainResult train_detector(const RunConfig& cfg, const Dataset& dataset,
                           const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Validation pass at the current params: detections + gate stats per scene.
struct ValEval {
  EvalResult eval;
  std::optional<double> gate_lidar_mean, gate_radar_mean;
  std::vector<std::optional<double>> gate_lidar_bins, gate_radar_bins;
};
ValEval evaluate_detector(const RunConfig& cfg, const Dataset& dataset, const std::string& split,
                          DetectorParams& params, int jobs = 1);

}  // namespace lrf
