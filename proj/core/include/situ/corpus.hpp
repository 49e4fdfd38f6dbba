#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "situ/cue.hpp"
#include "situ/synthetic.hpp"
#include "situ/training.hpp"

namespace situ {

// One cue per line.
void write_cues(const std::filesystem::path& path, const std::vector<SituationCue>& cues);
std::vector<SituationCue> load_cues(const std::filesystem::path& path);

// "scene_0007"
std::string synthetic_scene_id(int index);

// Seed of scene `index` in a split generated from `seed`.
std::uint64_t synthetic_scene_seed(std::uint64_t seed, int index);

Scene synthetic_scene(std::uint64_t seed, int index);

// Observer poses used for both the trajectory frames and the cues.
std::uint64_t synthetic_trajectory_seed(std::uint64_t scene_seed);

// Cues for the first `count` trajectory poses of a scene.
std::vector<SituationCue> synthetic_cues(const Scene& scene, std::uint64_t scene_seed, int count);

// `scenes` generated scenes with `per_scene` samples each, scene-major order.
std::vector<TrainSample> synthetic_split(int scenes, int per_scene, std::uint64_t seed,
                                         int threads = 1);

// Directory layout written by gen-scenes: scenes/<id>.json plus
// cues/<id>.jsonl. Scenes are visited in file-name order; a scene without a
// cue file contributes no samples. Throws ParseError when no samples remain.
std::vector<TrainSample> load_corpus(const std::filesystem::path& dir);

}  // namespace situ
