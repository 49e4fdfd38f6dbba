#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "situ/geometry.hpp"
#include "situ/region.hpp"

namespace situ {

// The 20-label vocabulary used by generated scenes.
const std::vector<std::string>& default_vocabulary();

struct SceneGenConfig {
  std::string scene_id;  // empty: "scene_<seed>"
  double room_x = 8.0;
  double room_y = 8.0;
  double room_z = 3.0;
  int min_instances = 5;
  int max_instances = 15;
  int min_points = 50;
  int max_points = 200;
  std::vector<std::string> vocabulary = default_vocabulary();
  // Fraction of objects pushed against a wall; the rest are placed anywhere.
  double wall_fraction = 0.75;
  // Unlabeled floor grid spacing; <= 0 disables the floor.
  double floor_spacing = 0.5;
  std::uint64_t seed = 0;
};

// Throws ConfigError on non-positive extents or empty/inverted ranges.
void validate(const SceneGenConfig& cfg);

// Axis-aligned point blobs resting on the floor of a [0,room_x]x[0,room_y]
// room, plus an unlabeled floor grid. Deterministic per cfg.seed.
Scene gen_scene(const SceneGenConfig& cfg);

inline constexpr double kEyeHeight = 1.5;

// Uniform x-y inside the scene bounds at eye height, uniform yaw in [-pi, pi).
Situation gen_situation(const Scene& scene, std::uint64_t seed, double eye_height = kEyeHeight);

struct FrameConfig {
  int width = 160;
  int height = 120;
  Intrinsics intrinsic{130.0, 130.0, 80.0, 60.0};
  double pitch = 0.35;  // radians, positive tilts the view down
};

// Depth = nearest projected point per pixel (1-pixel splat), 0 elsewhere.
CameraFrame gen_frame(const Scene& scene, const Situation& situation, const FrameConfig& cfg,
                      std::string frame_id = "frame_0");

struct TrajectorySample {
  Situation situation;
  CameraFrame frame;
};

// `count` independent poses, frame ids "<scene_id>_f<index>".
std::vector<TrajectorySample> gen_trajectory(const Scene& scene, int count, std::uint64_t seed,
                                             const FrameConfig& cfg);

}  // namespace situ
