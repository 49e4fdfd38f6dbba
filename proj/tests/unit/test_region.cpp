#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "situ/error.hpp"
#include "situ/region.hpp"
#include "support.hpp"

using namespace situ;
using situ::testing::make_scene;

namespace {

CameraFrame simple_frame(int w = 100, int h = 100, double depth = 0.0) {
  CameraFrame f;
  f.frame_id = "f";
  f.intrinsic = {100, 100, 50, 50};
  f.width = w;
  f.height = h;
  f.depth.assign(static_cast<std::size_t>(w) * h, depth);
  return f;
}

}  // namespace

TEST(ProjectPoint, OnAxis) {
  const auto p = project_point(simple_frame(), {0, 0, 2});
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->u, 50);
  EXPECT_DOUBLE_EQ(p->v, 50);
  EXPECT_DOUBLE_EQ(p->depth, 2.0);
}

TEST(ProjectPoint, BehindCameraIsOutOfView) {
  EXPECT_FALSE(project_point(simple_frame(), {0, 0, -1}));
  EXPECT_FALSE(project_point(simple_frame(), {0, 0, 0}));
}

TEST(ProjectPoint, RightEdgeIsExclusive) {
  // u lands exactly on width
  EXPECT_FALSE(project_point(simple_frame(100), {1, 0, 2}));
  EXPECT_TRUE(project_point(simple_frame(101), {1, 0, 2}));
}

TEST(VisiblePoints, DepthTest) {
  const Scene near = make_scene({{"a", {{0, 0, 2}}}});
  const Scene far = make_scene({{"a", {{0, 0, 5}}}});
  const CameraFrame f = simple_frame(100, 100, 2.0);
  EXPECT_EQ(visible_points(f, near, 0.05), std::vector<int>{0});
  EXPECT_TRUE(visible_points(f, far, 0.05).empty());
}

TEST(VisiblePoints, InvalidDepthExcludes) {
  const Scene s = make_scene({{"a", {{0, 0, 2}}}});
  EXPECT_TRUE(visible_points(simple_frame(100, 100, 0.0), s, 0.05).empty());
}

TEST(VisiblePoints, Errors) {
  const Scene s = make_scene({{"a", {{0, 0, 2}}}});
  CameraFrame f = simple_frame();
  EXPECT_THROW(visible_points(f, s, 0.0), std::invalid_argument);
  f.depth.pop_back();
  EXPECT_THROW(visible_points(f, s, 0.05), InvalidFrame);
}

TEST(VisiblePoints, MonotoneInTolerance) {
  const Scene s = make_scene({{"a", {{0, 0, 2.0}, {0.1, 0, 2.04}, {0.2, 0, 2.2}, {0.3, 0, 3}}}});
  const CameraFrame f = simple_frame(100, 100, 2.0);
  std::vector<int> prev;
  for (double tol : {0.01, 0.05, 0.3, 2.0}) {
    const auto cur = visible_points(f, s, tol);
    EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = cur;
  }
  EXPECT_EQ(prev.size(), 4u);
}

TEST(ExtractRegion, FullyVisibleInstance) {
  const Scene s = make_scene({{"box", {{0, 0, 2}, {0.1, 0.1, 2}, {-0.1, 0, 2}}}});
  const auto r = extract_region(simple_frame(100, 100, 2.0), s, 0.05, 0.25);
  EXPECT_EQ(r.visible_instance_ids, std::vector<int>{0});
  EXPECT_EQ(r.point_indices, (std::vector<int>{0, 1, 2}));
  EXPECT_FALSE(r.empty());
}

TEST(ExtractRegion, BehindCameraAbsent) {
  const Scene s = make_scene({{"box", {{0, 0, -2}, {0.1, 0, -2}}}});
  const auto r = extract_region(simple_frame(100, 100, 2.0), s);
  EXPECT_TRUE(r.empty());
  EXPECT_TRUE(r.visible_instance_ids.empty());
}

TEST(ExtractRegion, PartialVisibilityBelowFraction) {
  // 3 of 10 points in front of the camera
  std::vector<Vec3> pts;
  for (int i = 0; i < 3; ++i) {
    pts.push_back({0.01 * i, 0, 2});
  }
  for (int i = 0; i < 7; ++i) {
    pts.push_back({0.01 * i, 0, -2});
  }
  const Scene s = make_scene({{"box", pts}});
  const auto r = extract_region(simple_frame(100, 100, 2.0), s, 0.05, 0.5);
  EXPECT_TRUE(r.visible_instance_ids.empty());
  EXPECT_EQ(r.point_indices, (std::vector<int>{0, 1, 2}));

  const auto r2 = extract_region(simple_frame(100, 100, 2.0), s, 0.05, 0.3);
  EXPECT_EQ(r2.visible_instance_ids, std::vector<int>{0});
}

TEST(ExtractRegion, FractionMustBeInUnitInterval) {
  const Scene s = make_scene({{"box", {{0, 0, 2}}}});
  EXPECT_THROW(extract_region(simple_frame(), s, 0.05, 0.0), std::invalid_argument);
  EXPECT_THROW(extract_region(simple_frame(), s, 0.05, 1.5), std::invalid_argument);
}

TEST(ValidateFrame, RejectsBadFrames) {
  CameraFrame f = simple_frame();
  EXPECT_NO_THROW(validate_frame(f));
  CameraFrame skew = f;
  skew.extrinsic(0, 1) = 0.5;
  EXPECT_THROW(validate_frame(skew), InvalidFrame);
  CameraFrame fx = f;
  fx.intrinsic.fx = 0;
  EXPECT_THROW(validate_frame(fx), InvalidFrame);
  CameraFrame neg = f;
  neg.depth[3] = -1;
  EXPECT_THROW(validate_frame(neg), InvalidFrame);
}

TEST(SituationFromFrame, IdentityAndTranslation) {
  CameraFrame f = simple_frame();
  EXPECT_EQ(situation_from_frame(f).position, Vec3::Zero());
  f.extrinsic(2, 3) = 3;
  EXPECT_TRUE(situation_from_frame(f).position.isApprox(Vec3(0, 0, -3)));
}

TEST(SituationFromFrame, HandInvertedExtrinsic) {
  // observer at (1,2,1.5) facing +y: camera x -> world +x, camera z -> world +y
  Mat4 e;
  e << 1, 0, 0, -1,
       0, 0, -1, 1.5,
       0, 1, 0, -2,
       0, 0, 0, 1;
  const Situation s = situation_from_extrinsic(e);
  EXPECT_LT((s.position - Vec3(1, 2, 1.5)).norm(), 1e-12);
  EXPECT_NEAR(yaw_from_quat(s.rotation), std::numbers::pi / 2, 1e-12);
  EXPECT_TRUE(s.rotation.is_pure_yaw(1e-12));
}

TEST(SituationFromFrame, RejectsNonOrthonormal) {
  Mat4 e = Mat4::Identity();
  e(0, 0) = 1.1;
  EXPECT_THROW(situation_from_extrinsic(e), InvalidFrame);
  Mat4 flip = Mat4::Identity();
  flip(2, 2) = -1;  // reflection
  EXPECT_THROW(situation_from_extrinsic(flip), InvalidFrame);
}

TEST(SituationFromFrame, RoundTrip) {
  for (int i = 0; i < 100; ++i) {
    Situation s;
    s.position = {0.1 * i, -0.05 * i, 1.5};
    s.rotation = quat_from_yaw(-3.0 + 0.06 * i);
    for (double pitch : {0.0, 0.35}) {
      const Situation back = situation_from_extrinsic(extrinsic_from_situation(s, pitch));
      EXPECT_LT((back.position - s.position).norm(), 1e-9);
      EXPECT_LT(std::abs(wrap_angle(yaw_from_quat(back.rotation) - yaw_from_quat(s.rotation))), 1e-9);
      if (pitch == 0.0) {
        EXPECT_LT(std::abs(back.rotation.qz - s.rotation.qz) + std::abs(back.rotation.w - s.rotation.w),
                  1e-9);
      }
    }
  }
}

TEST(CameraToBody, IsProperRotation) {
  const Mat3 c = camera_to_body();
  EXPECT_TRUE((c * c.transpose()).isApprox(Mat3::Identity()));
  EXPECT_TRUE(c.col(2).isApprox(Vec3(1, 0, 0)));   // optical axis forward
  EXPECT_TRUE(c.col(0).isApprox(Vec3(0, -1, 0)));  // image right is body right
}
