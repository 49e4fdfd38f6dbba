#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace situ {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Unit quaternion stored in (qx, qy, qz, w) order. World frame is z-up; zero
// yaw faces +x and yaw grows counterclockwise about +z.
struct Quaternion {
  double qx = 0.0;
  double qy = 0.0;
  double qz = 0.0;
  double w = 1.0;

  static Quaternion identity() { return {}; }

  double norm() const;
  // Unit norm with w >= 0. Throws std::invalid_argument on a zero or
  // non-finite quaternion.
  Quaternion normalized() const;
  bool is_finite() const;
  bool is_pure_yaw(double tol = 1e-12) const;

  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

// Hamilton product a ⊗ b, renormalized and canonicalized (w >= 0).
Quaternion quat_mul(const Quaternion& a, const Quaternion& b);

// (0, 0, sin(theta/2), cos(theta/2)), canonicalized to w >= 0.
Quaternion quat_from_yaw(double theta);

// Yaw in [-pi, pi) of the rotated +x axis projected onto the x-y plane.
// Throws DegenerateOrientation when that projection vanishes.
double yaw_from_quat(const Quaternion& q);

Mat3 rotation_matrix(const Quaternion& q);
Quaternion quat_from_matrix(const Mat3& r);

// Representative of theta mod 2pi in [-pi, pi).
double wrap_angle(double theta);

// B equal yaw bins partitioning [-pi, pi). Bins are half-open [lo, hi).
class YawBins {
 public:
  explicit YawBins(int count);
  int count() const noexcept { return count_; }
  double width() const noexcept;

 private:
  int count_;
};

// Bin center: -pi + (2pi/B)(b + 1/2). Throws std::out_of_range.
double bin_to_angle(int bin, const YawBins& bins);
int angle_to_bin(double theta, const YawBins& bins);

struct Point {
  double x = 0, y = 0, z = 0;
  double r = 0, g = 0, b = 0;

  Vec3 xyz() const { return {x, y, z}; }
  friend bool operator==(const Point&, const Point&) = default;
};

struct Instance {
  int id = 0;
  std::string label;
  std::vector<int> point_indices;
  Vec3 center = Vec3::Zero();
  Vec3 bbox_extent = Vec3::Zero();  // axis-aligned half-widths

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Scene {
  std::string scene_id;
  std::vector<Point> points;
  std::vector<Instance> instances;

  const Instance* find_instance(int id) const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

struct Situation {
  Vec3 position = Vec3::Zero();
  Quaternion rotation;

  friend bool operator==(const Situation&, const Situation&) = default;
};

struct Anchor {
  int instance_id = 0;
  Vec3 position = Vec3::Zero();
  Quaternion rotation;
};

// Builds an instance whose center and extent are recomputed from its points.
Instance make_instance(int id, std::string label, std::vector<int> point_indices,
                       const std::vector<Point>& points);

// Throws InvalidScene naming the first violated invariant.
void validate_scene(const Scene& scene);

// Mean of all point coordinates. Throws InvalidScene on an empty cloud.
Vec3 scene_centroid(const Scene& scene);

struct AnchorRotation {
  Quaternion rotation;
  bool degenerate = false;
};

// Pure yaw facing from the instance center toward the scene centroid (x-y).
AnchorRotation anchor_rotation(const Instance& instance, const Scene& scene);
AnchorRotation anchor_rotation(const Instance& instance, const Vec3& centroid);

// One anchor per instance, in instance order.
std::vector<Anchor> scene_anchors(const Scene& scene);

struct Bounds2 {
  double min_x, min_y, max_x, max_y;
};

// x-y bounding box of the point cloud.
Bounds2 scene_bounds_xy(const Scene& scene);

}  // namespace situ
