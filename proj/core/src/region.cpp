#include "situ/region.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "situ/error.hpp"

namespace situ {

namespace {

void check_rotation(const Mat3& r) {
  if (!r.allFinite()) {
    throw InvalidFrame("extrinsic has non-finite entries");
  }
  const double err = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-6 || r.determinant() <= 0.0) {
    throw InvalidFrame("extrinsic rotation block is not orthonormal");
  }
}

}  // namespace

void validate_frame(const CameraFrame& frame) {
  check_rotation(frame.extrinsic.topLeftCorner<3, 3>());
  if (!(frame.intrinsic.fx > 0.0) || !(frame.intrinsic.fy > 0.0)) {
    throw InvalidFrame("frame " + frame.frame_id + ": fx and fy must be positive");
  }
  if (frame.width <= 0 || frame.height <= 0) {
    throw InvalidFrame("frame " + frame.frame_id + ": non-positive image size");
  }
  if (frame.depth.size() != static_cast<std::size_t>(frame.width) * frame.height) {
    throw InvalidFrame("frame " + frame.frame_id + ": depth map is " +
                       std::to_string(frame.depth.size()) + " values, expected " +
                       std::to_string(frame.width) + "x" + std::to_string(frame.height));
  }
  for (double d : frame.depth) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw InvalidFrame("frame " + frame.frame_id + ": negative or non-finite depth");
    }
  }
}

std::optional<Projection> project_point(const CameraFrame& frame, const Vec3& p) {
  const Vec3 c = frame.extrinsic.topLeftCorner<3, 3>() * p + frame.extrinsic.topRightCorner<3, 1>();
  if (!(c.z() > 0.0)) {
    return std::nullopt;
  }
  const double u = frame.intrinsic.fx * c.x() / c.z() + frame.intrinsic.cx;
  const double v = frame.intrinsic.fy * c.y() / c.z() + frame.intrinsic.cy;
  if (!(u >= 0.0 && u < frame.width && v >= 0.0 && v < frame.height)) {
    return std::nullopt;
  }
  return Projection{u, v, c.z()};
}

std::vector<int> visible_points(const CameraFrame& frame, const Scene& scene, double depth_tol) {
  if (!(depth_tol > 0.0)) {
    throw std::invalid_argument("visible_points: depth_tol must be positive");
  }
  if (frame.depth.size() != static_cast<std::size_t>(frame.width) * frame.height) {
    throw InvalidFrame("frame " + frame.frame_id + ": depth map does not match width x height");
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const auto proj = project_point(frame, scene.points[i].xyz());
    if (!proj) {
      continue;
    }
    const int u = static_cast<int>(std::floor(proj->u));
    const int v = static_cast<int>(std::floor(proj->v));
    const double buffer = frame.depth_at(u, v);
    if (buffer > 0.0 && proj->depth <= buffer + depth_tol) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

RegionCloud extract_region(const CameraFrame& frame, const Scene& scene, double depth_tol,
                           double min_visible_fraction) {
  if (!(min_visible_fraction > 0.0 && min_visible_fraction <= 1.0)) {
    throw std::invalid_argument("extract_region: min_visible_fraction must be in (0, 1]");
  }
  RegionCloud region;
  region.scene_id = scene.scene_id;
  region.frame_id = frame.frame_id;
  region.depth_tol = depth_tol;
  region.min_visible_fraction = min_visible_fraction;
  region.point_indices = visible_points(frame, scene, depth_tol);
  if (region.point_indices.empty()) {
    return region;
  }
  std::vector<char> visible(scene.points.size(), 0);
  for (int idx : region.point_indices) {
    visible[idx] = 1;
  }
  for (const auto& inst : scene.instances) {
    std::size_t seen = 0;
    for (int idx : inst.point_indices) {
      seen += visible[idx];
    }
    if (seen > 0 && static_cast<double>(seen) >=
                        min_visible_fraction * static_cast<double>(inst.point_indices.size())) {
      region.visible_instance_ids.push_back(inst.id);
    }
  }
  return region;
}

Mat3 camera_to_body() {
  Mat3 m;
  // columns: camera x (right) -> -y, camera y (down) -> -z, camera z -> +x
  m << 0, 0, 1,
      -1, 0, 0,
      0, -1, 0;
  return m;
}

Mat4 extrinsic_from_situation(const Situation& s, double pitch) {
  Mat3 tilt;
  const double c = std::cos(pitch), sn = std::sin(pitch);
  tilt << c, 0, sn,
      0, 1, 0,
      -sn, 0, c;
  const Mat3 body_to_world = rotation_matrix(s.rotation.normalized()) * tilt;
  const Mat3 cam_to_world = body_to_world * camera_to_body();
  Mat4 e = Mat4::Identity();
  e.topLeftCorner<3, 3>() = cam_to_world.transpose();
  e.topRightCorner<3, 1>() = -cam_to_world.transpose() * s.position;
  return e;
}

Situation situation_from_extrinsic(const Mat4& extrinsic) {
  const Mat3 r = extrinsic.topLeftCorner<3, 3>();
  check_rotation(r);
  const Vec3 t = extrinsic.topRightCorner<3, 1>();
  Situation s;
  s.position = -r.transpose() * t;
  s.rotation = quat_from_matrix(r.transpose() * camera_to_body().transpose());
  return s;
}

Situation situation_from_frame(const CameraFrame& frame) {
  return situation_from_extrinsic(frame.extrinsic);
}

}  // namespace situ
