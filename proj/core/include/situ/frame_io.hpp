#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "situ/region.hpp"

namespace situ {

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> meters;  // row-major
};

// 16-bit binary PGM (P5, maxval 65535, big-endian samples); one unit is a
// millimeter and 0 means invalid. Depths are rounded to the nearest mm and
// saturate at 65.535 m.
void write_depth_pgm(const std::filesystem::path& path, int width, int height,
                     const std::vector<double>& meters);
DepthImage read_depth_pgm(const std::filesystem::path& path);

// One line of a trajectory file. `depth_path` is resolved against the
// directory holding the trajectory file. Fields not listed here are kept in
// `extra` and written back unchanged.
struct TrajectoryEntry {
  std::string frame_id;
  Mat4 extrinsic = Mat4::Identity();
  Intrinsics intrinsic;
  int width = 0;
  int height = 0;
  std::string depth_path;
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json trajectory_entry_to_json(const TrajectoryEntry& e);
TrajectoryEntry trajectory_entry_from_json(const nlohmann::json& j);

// JSON-lines; malformed lines raise ParseError carrying the 1-based line.
std::vector<TrajectoryEntry> load_trajectory(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path,
                      const std::vector<TrajectoryEntry>& entries);

// Reads the depth map referenced by `entry` and validates the frame.
CameraFrame load_frame(const TrajectoryEntry& entry, const std::filesystem::path& base_dir);

}  // namespace situ
