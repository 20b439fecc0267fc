#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lrf/config.hpp"
#include "lrf/datagen.hpp"

namespace lrf {

/// In-memory view of a dataset directory.
struct Dataset {
  std::vector<Scene> scenes;
  std::vector<std::string> splits;  // parallel to scenes: "train" / "val"

  std::vector<std::size_t> split_indices(const std::string& split) const;
};

/// Writes n_scenes scenes (scene i seeded with scene.seed + i) as LRPC1 sweep
/// files plus a manifest.json carrying ground truth, sweep poses, split tags
/// (80/20 train/val by index), and the generating config. Regeneration with
/// the same config is byte-identical. jobs > 1 generates scenes in parallel;
/// files and manifest entries keep scene-id order either way.
void generate_dataset(const RunConfig& cfg, const std::filesystem::path& out_dir, int jobs = 1);

Dataset load_dataset(const std::filesystem::path& dir);

/// Split tag of scene `index` out of `total`: the first ceil(0.8 * total) are
/// "train", the rest "val".
std::string split_of_index(int index, int total);

}  // namespace lrf
