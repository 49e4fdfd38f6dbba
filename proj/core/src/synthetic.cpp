#include "situ/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "situ/error.hpp"
#include "situ/rng.hpp"

namespace situ {

const std::vector<std::string>& default_vocabulary() {
  static const std::vector<std::string> vocab = {
      "chair",   "table",     "sofa",         "bed",     "cabinet",
      "desk",    "bookshelf", "lamp",         "tv",      "toilet",
      "sink",    "bathtub",   "refrigerator", "dresser", "nightstand",
      "armchair", "plant",    "trash_can",    "piano",   "monitor"};
  return vocab;
}

void validate(const SceneGenConfig& cfg) {
  std::string bad;
  auto flag = [&](bool ok, const char* field) {
    if (!ok) {
      bad += bad.empty() ? field : std::string(", ") + field;
    }
  };
  flag(cfg.room_x > 0 && cfg.room_y > 0 && cfg.room_z > 0, "room extent");
  flag(cfg.min_instances >= 1 && cfg.max_instances >= cfg.min_instances, "instance count range");
  flag(cfg.min_points >= 1 && cfg.max_points >= cfg.min_points, "points per instance range");
  flag(!cfg.vocabulary.empty(), "vocabulary");
  flag(cfg.wall_fraction >= 0 && cfg.wall_fraction <= 1, "wall_fraction");
  if (!bad.empty()) {
    throw ConfigError("invalid SceneGenConfig: " + bad);
  }
}

Scene gen_scene(const SceneGenConfig& cfg) {
  validate(cfg);
  Rng rng(mix_seed(cfg.seed, 0x5ce4e));
  Scene scene;
  scene.scene_id = cfg.scene_id.empty() ? "scene_" + std::to_string(cfg.seed) : cfg.scene_id;

  const int n_instances = rng.uniform_int(cfg.min_instances, cfg.max_instances);
  for (int id = 0; id < n_instances; ++id) {
    const auto& label = cfg.vocabulary[rng.uniform_int(0, static_cast<int>(cfg.vocabulary.size()) - 1)];
    // Keep half-extents small enough to fit in tiny test rooms.
    const double cap_x = std::max(0.0, cfg.room_x / 2 - 1e-3);
    const double cap_y = std::max(0.0, cfg.room_y / 2 - 1e-3);
    const double hx = std::min(rng.uniform(0.15, 0.5), cap_x);
    const double hy = std::min(rng.uniform(0.15, 0.5), cap_y);
    const double hz = std::min(rng.uniform(0.2, 0.6), cfg.room_z / 2);
    double cx = rng.uniform(hx, cfg.room_x - hx);
    double cy = rng.uniform(hy, cfg.room_y - hy);
    if (rng.bernoulli(cfg.wall_fraction)) {
      const double gap = rng.uniform(0.02, 0.3);
      switch (rng.uniform_int(0, 3)) {
        case 0: cx = std::min(hx + gap, cfg.room_x - hx); break;
        case 1: cx = std::max(cfg.room_x - hx - gap, hx); break;
        case 2: cy = std::min(hy + gap, cfg.room_y - hy); break;
        default: cy = std::max(cfg.room_y - hy - gap, hy); break;
      }
    }
    const int n_points = rng.uniform_int(cfg.min_points, cfg.max_points);
    // Per-label base color, jittered per point.
    std::uint64_t label_hash = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char ch : label) {
      label_hash = (label_hash ^ ch) * 1099511628211ULL;
    }
    const double base[3] = {((label_hash >> 0) & 0xff) / 255.0, ((label_hash >> 8) & 0xff) / 255.0,
                            ((label_hash >> 16) & 0xff) / 255.0};
    std::vector<int> indices;
    indices.reserve(n_points);
    for (int k = 0; k < n_points; ++k) {
      Point p;
      p.x = rng.uniform(cx - hx, cx + hx);
      p.y = rng.uniform(cy - hy, cy + hy);
      p.z = rng.uniform(0.0, 2 * hz);
      p.r = std::clamp(base[0] + rng.uniform(-0.05, 0.05), 0.0, 1.0);
      p.g = std::clamp(base[1] + rng.uniform(-0.05, 0.05), 0.0, 1.0);
      p.b = std::clamp(base[2] + rng.uniform(-0.05, 0.05), 0.0, 1.0);
      indices.push_back(static_cast<int>(scene.points.size()));
      scene.points.push_back(p);
    }
    scene.instances.push_back(make_instance(id, label, std::move(indices), scene.points));
  }

  if (cfg.floor_spacing > 0) {
    const int nx = static_cast<int>(std::floor(cfg.room_x / cfg.floor_spacing + 1e-9));
    const int ny = static_cast<int>(std::floor(cfg.room_y / cfg.floor_spacing + 1e-9));
    for (int i = 0; i <= nx; ++i) {
      for (int j = 0; j <= ny; ++j) {
        scene.points.push_back({std::min(i * cfg.floor_spacing, cfg.room_x),
                                std::min(j * cfg.floor_spacing, cfg.room_y), 0.0, 0.5, 0.5, 0.5});
      }
    }
  }
  return scene;
}

Situation gen_situation(const Scene& scene, std::uint64_t seed, double eye_height) {
  const Bounds2 b = scene_bounds_xy(scene);
  Rng rng(mix_seed(seed, 0x517));
  Situation s;
  s.position = {rng.uniform(b.min_x, b.max_x), rng.uniform(b.min_y, b.max_y), eye_height};
  s.rotation = quat_from_yaw(rng.uniform(-std::numbers::pi, std::numbers::pi));
  return s;
}

CameraFrame gen_frame(const Scene& scene, const Situation& situation, const FrameConfig& cfg,
                      std::string frame_id) {
  CameraFrame frame;
  frame.frame_id = std::move(frame_id);
  frame.extrinsic = extrinsic_from_situation(situation, cfg.pitch);
  frame.intrinsic = cfg.intrinsic;
  frame.width = cfg.width;
  frame.height = cfg.height;
  frame.depth.assign(static_cast<std::size_t>(cfg.width) * cfg.height, 0.0);
  validate_frame(frame);
  for (const auto& p : scene.points) {
    const auto proj = project_point(frame, p.xyz());
    if (!proj) {
      continue;
    }
    const auto u = static_cast<std::size_t>(std::floor(proj->u));
    const auto v = static_cast<std::size_t>(std::floor(proj->v));
    double& d = frame.depth[v * cfg.width + u];
    if (d == 0.0 || proj->depth < d) {
      d = proj->depth;
    }
  }
  return frame;
}

std::vector<TrajectorySample> gen_trajectory(const Scene& scene, int count, std::uint64_t seed,
                                             const FrameConfig& cfg) {
  std::vector<TrajectorySample> out;
  out.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "_f%03d", i);
    Situation s = gen_situation(scene, mix_seed(seed, static_cast<std::uint64_t>(i)));
    CameraFrame f = gen_frame(scene, s, cfg, scene.scene_id + id);
    out.push_back({s, std::move(f)});
  }
  return out;
}

}  // namespace situ
