#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "situ/geometry.hpp"

namespace situ {

using Mat4 = Eigen::Matrix4d;

struct Intrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

// Pinhole camera looking along +z of its own frame (+x right, +y down).
// `extrinsic` maps world to camera; `depth` is row-major (v * width + u) in
// meters with 0 marking an invalid pixel.
struct CameraFrame {
  std::string frame_id;
  Mat4 extrinsic = Mat4::Identity();
  Intrinsics intrinsic;
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  double depth_at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
};

// Throws InvalidFrame: non-orthonormal rotation (1e-6), fx/fy <= 0, bad sizes,
// negative or non-finite depth.
void validate_frame(const CameraFrame& frame);

struct Projection {
  double u = 0, v = 0;  // pixels
  double depth = 0;     // camera-frame z, meters
};

// nullopt when behind the camera or outside [0,width) x [0,height).
std::optional<Projection> project_point(const CameraFrame& frame, const Vec3& p);

inline constexpr double kDefaultDepthTolerance = 0.05;
inline constexpr double kDefaultMinVisibleFraction = 0.25;

// Indices (ascending) of points whose projection lands in frame on a valid
// depth pixel with projected depth <= buffer + depth_tol. Pixel = floor(u, v).
std::vector<int> visible_points(const CameraFrame& frame, const Scene& scene,
                                double depth_tol = kDefaultDepthTolerance);

struct RegionCloud {
  std::string scene_id;
  std::string frame_id;
  std::vector<int> point_indices;
  std::vector<int> visible_instance_ids;
  double depth_tol = kDefaultDepthTolerance;
  double min_visible_fraction = kDefaultMinVisibleFraction;

  bool empty() const { return point_indices.empty(); }
  friend bool operator==(const RegionCloud&, const RegionCloud&) = default;
};

// Visible points plus the instances keeping >= min_visible_fraction of their
// points. An empty visible set yields an empty region, not an error.
RegionCloud extract_region(const CameraFrame& frame, const Scene& scene,
                           double depth_tol = kDefaultDepthTolerance,
                           double min_visible_fraction = kDefaultMinVisibleFraction);

// Body frame of a situation: +x forward, +y left, +z up. Maps camera axes
// (x right, y down, z forward) into body axes.
Mat3 camera_to_body();

// World-to-camera transform for an observer at `s`, tilted down by `pitch`.
Mat4 extrinsic_from_situation(const Situation& s, double pitch = 0.0);

// Camera center -R^T t and body orientation. Throws InvalidFrame on a
// rotation block that is not orthonormal within 1e-6.
Situation situation_from_extrinsic(const Mat4& extrinsic);
Situation situation_from_frame(const CameraFrame& frame);

}  // namespace situ
