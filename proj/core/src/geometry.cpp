#include "situ/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

#include "situ/error.hpp"

namespace situ {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Quaternion canonical(Quaternion q) {
  if (q.w < 0.0) {
    q = {-q.qx, -q.qy, -q.qz, -q.w};
  }
  return q;
}

}  // namespace

double Quaternion::norm() const {
  return std::sqrt(qx * qx + qy * qy + qz * qz + w * w);
}

bool Quaternion::is_finite() const {
  return std::isfinite(qx) && std::isfinite(qy) && std::isfinite(qz) &&
         std::isfinite(w);
}

Quaternion Quaternion::normalized() const {
  if (!is_finite()) {
    throw std::invalid_argument("quaternion has non-finite components");
  }
  const double n = norm();
  if (n == 0.0) {
    throw std::invalid_argument("zero quaternion cannot be normalized");
  }
  return canonical({qx / n, qy / n, qz / n, w / n});
}

bool Quaternion::is_pure_yaw(double tol) const {
  return std::abs(qx) <= tol && std::abs(qy) <= tol;
}

Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
  if (!a.is_finite() || !b.is_finite()) {
    throw std::invalid_argument("quat_mul: non-finite input");
  }
  const Quaternion p{
      a.w * b.qx + a.qx * b.w + a.qy * b.qz - a.qz * b.qy,
      a.w * b.qy - a.qx * b.qz + a.qy * b.w + a.qz * b.qx,
      a.w * b.qz + a.qx * b.qy - a.qy * b.qx + a.qz * b.w,
      a.w * b.w - a.qx * b.qx - a.qy * b.qy - a.qz * b.qz,
  };
  return p.normalized();
}

Quaternion quat_from_yaw(double theta) {
  return canonical({0.0, 0.0, std::sin(theta / 2.0), std::cos(theta / 2.0)});
}

double yaw_from_quat(const Quaternion& q) {
  // First column of the rotation matrix: image of the +x forward axis.
  const double fx = 1.0 - 2.0 * (q.qy * q.qy + q.qz * q.qz);
  const double fy = 2.0 * (q.qx * q.qy + q.w * q.qz);
  if (std::hypot(fx, fy) < 1e-9) {
    throw DegenerateOrientation("forward axis is vertical; yaw undefined");
  }
  return wrap_angle(std::atan2(fy, fx));
}

Mat3 rotation_matrix(const Quaternion& q) {
  const double x = q.qx, y = q.qy, z = q.qz, w = q.w;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Quaternion quat_from_matrix(const Mat3& r) {
  const Eigen::Quaterniond q(r);
  return Quaternion{q.x(), q.y(), q.z(), q.w()}.normalized();
}

double wrap_angle(double theta) {
  if (theta >= -kPi && theta < kPi) {
    return theta;
  }
  double r = std::fmod(theta + kPi, kTwoPi);
  if (r < 0.0) {
    r += kTwoPi;
  }
  if (r >= kTwoPi) {
    r -= kTwoPi;
  }
  const double out = r - kPi;
  return out >= kPi ? -kPi : out;
}

YawBins::YawBins(int count) : count_(count) {
  if (count < 2) {
    throw std::invalid_argument("YawBins: bin count must be >= 2");
  }
}

double YawBins::width() const noexcept { return kTwoPi / count_; }

double bin_to_angle(int bin, const YawBins& bins) {
  if (bin < 0 || bin >= bins.count()) {
    throw std::out_of_range("bin_to_angle: bin " + std::to_string(bin) +
                            " outside [0, " + std::to_string(bins.count()) + ")");
  }
  return -kPi + bins.width() * (bin + 0.5);
}

int angle_to_bin(double theta, const YawBins& bins) {
  const double x = wrap_angle(theta);
  const int last = bins.count() - 1;
  int b = std::clamp(static_cast<int>(std::floor((x + kPi) / bins.width())), 0, last);
  // floor() can land one bin off next to a seam; pick the neighbour whose
  // center is within half a bin when the first choice is not.
  const double half = kPi / bins.count();
  if (std::abs(bin_to_angle(b, bins) - x) > half) {
    if (b > 0 && std::abs(bin_to_angle(b - 1, bins) - x) <= half) {
      --b;
    } else if (b < last && std::abs(bin_to_angle(b + 1, bins) - x) <= half) {
      ++b;
    }
  }
  return b;
}

const Instance* Scene::find_instance(int id) const {
  for (const auto& inst : instances) {
    if (inst.id == id) {
      return &inst;
    }
  }
  return nullptr;
}

Instance make_instance(int id, std::string label, std::vector<int> point_indices,
                       const std::vector<Point>& points) {
  if (point_indices.empty()) {
    throw InvalidScene("instance " + std::to_string(id) + " has no points");
  }
  Vec3 sum = Vec3::Zero();
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int idx : point_indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= points.size()) {
      throw InvalidScene("instance " + std::to_string(id) + " point index out of range");
    }
    const Vec3 p = points[idx].xyz();
    sum += p;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Instance inst;
  inst.id = id;
  inst.label = std::move(label);
  inst.center = sum / static_cast<double>(point_indices.size());
  // Half-widths about the mean, so the box centered there encloses every point.
  inst.bbox_extent = (hi - inst.center).cwiseMax(inst.center - lo);
  inst.point_indices = std::move(point_indices);
  return inst;
}

void validate_scene(const Scene& scene) {
  if (scene.instances.empty()) {
    throw InvalidScene("scene '" + scene.scene_id + "' has no instances");
  }
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const Point& p = scene.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw InvalidScene("point " + std::to_string(i) + " has non-finite coordinates");
    }
    for (double c : {p.r, p.g, p.b}) {
      if (!(c >= 0.0 && c <= 1.0)) {
        throw InvalidScene("point " + std::to_string(i) + " color outside [0,1]");
      }
    }
  }
  std::unordered_set<int> ids;
  std::vector<char> owned(scene.points.size(), 0);
  for (const auto& inst : scene.instances) {
    const std::string tag = "instance " + std::to_string(inst.id);
    if (!ids.insert(inst.id).second) {
      throw InvalidScene(tag + " id is duplicated");
    }
    if (inst.point_indices.empty()) {
      throw InvalidScene(tag + " has no points");
    }
    Vec3 sum = Vec3::Zero();
    for (int idx : inst.point_indices) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= scene.points.size()) {
        throw InvalidScene(tag + " point index " + std::to_string(idx) + " out of range");
      }
      if (owned[idx]) {
        throw InvalidScene(tag + " shares point " + std::to_string(idx));
      }
      owned[idx] = 1;
      sum += scene.points[idx].xyz();
    }
    const Vec3 mean = sum / static_cast<double>(inst.point_indices.size());
    if ((mean - inst.center).cwiseAbs().maxCoeff() > 1e-6) {
      throw InvalidScene(tag + " center differs from the mean of its points");
    }
    if ((inst.bbox_extent.array() < 0.0).any()) {
      throw InvalidScene(tag + " has a negative bbox extent");
    }
    for (int idx : inst.point_indices) {
      const Vec3 d = (scene.points[idx].xyz() - inst.center).cwiseAbs();
      if (((d - inst.bbox_extent).array() > 1e-6).any()) {
        throw InvalidScene(tag + " bbox does not enclose point " + std::to_string(idx));
      }
    }
  }
}

Vec3 scene_centroid(const Scene& scene) {
  if (scene.points.empty()) {
    throw InvalidScene("scene '" + scene.scene_id + "' has an empty point cloud");
  }
  Vec3 sum = Vec3::Zero();
  for (const auto& p : scene.points) {
    sum += p.xyz();
  }
  return sum / static_cast<double>(scene.points.size());
}

AnchorRotation anchor_rotation(const Instance& instance, const Vec3& centroid) {
  const double dx = centroid.x() - instance.center.x();
  const double dy = centroid.y() - instance.center.y();
  if (std::hypot(dx, dy) <= 1e-9) {
    return {Quaternion::identity(), true};
  }
  return {quat_from_yaw(std::atan2(dy, dx)), false};
}

AnchorRotation anchor_rotation(const Instance& instance, const Scene& scene) {
  return anchor_rotation(instance, scene_centroid(scene));
}

std::vector<Anchor> scene_anchors(const Scene& scene) {
  const Vec3 centroid = scene_centroid(scene);
  std::vector<Anchor> anchors;
  anchors.reserve(scene.instances.size());
  for (const auto& inst : scene.instances) {
    anchors.push_back({inst.id, inst.center, anchor_rotation(inst, centroid).rotation});
  }
  return anchors;
}

Bounds2 scene_bounds_xy(const Scene& scene) {
  if (scene.points.empty()) {
    throw InvalidScene("scene '" + scene.scene_id + "' has an empty point cloud");
  }
  Bounds2 b{scene.points[0].x, scene.points[0].y, scene.points[0].x, scene.points[0].y};
  for (const auto& p : scene.points) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

}  // namespace situ
