// Copyright 2026 The ibrsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ibrsim/common/error.hpp"
#include "ibrsim/geometry/dataset.hpp"
#include "ibrsim/geometry/equirect.hpp"
#include "ibrsim/geometry/pointcloud.hpp"
#include "ibrsim/geometry/pose.hpp"

namespace ibrsim::geom {
namespace {

using std::numbers::pi;

Pose6D random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-5, 5), ang(-pi, pi);
  return Pose6D::make(pos(rng), pos(rng), pos(rng), ang(rng), ang(rng),
                      ang(rng));
}

TEST(Pose, ZeroPoseIsIdentity) {
  EXPECT_TRUE(pose_to_transform(Pose6D{}).is_near(RigidTransform::identity(),
                                                  0.0));
}

TEST(Pose, YawQuarterTurnMapsXToY) {
  const auto t = pose_to_transform(Pose6D::make(0, 0, 0, 0, 0, pi / 2));
  EXPECT_TRUE(t.apply(Vec3::UnitX()).isApprox(Vec3::UnitY(), 1e-12));
}

TEST(Pose, EulerOrderIsZyx) {
  const Pose6D p = Pose6D::make(0, 0, 0, 0.3, -0.4, 1.1);
  const Mat3 expected = Eigen::AngleAxisd(1.1, Vec3::UnitZ()).matrix() *
                        Eigen::AngleAxisd(-0.4, Vec3::UnitY()).matrix() *
                        Eigen::AngleAxisd(0.3, Vec3::UnitX()).matrix();
  EXPECT_LT((pose_to_transform(p).rotation() - expected).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Pose, GroupLawsHoldForRandomTransforms) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto a = pose_to_transform(random_pose(rng));
    const auto b = pose_to_transform(random_pose(rng));
    EXPECT_TRUE((a * a.inverse()).is_near(RigidTransform::identity(), 1e-9));
    EXPECT_TRUE((a.inverse() * a).is_near(RigidTransform::identity(), 1e-9));
    const Vec3 p(0.3, -1.2, 2.5);
    EXPECT_LT(((a * b).apply(p) - a.apply(b.apply(p))).norm(), 1e-9);
    const Mat3& r = a.rotation();
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(),
              1e-9);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
  }
}

TEST(Pose, NonFiniteInputIsRejected) {
  EXPECT_THROW(Pose6D::make(NAN, 0, 0, 0, 0, 0), InvalidPoseError);
  EXPECT_THROW(Pose6D::make(0, 0, 0, 0, INFINITY, 0), InvalidPoseError);
  Pose6D raw;
  raw.yaw = NAN;
  EXPECT_THROW(pose_to_transform(raw), InvalidPoseError);
  Mat3 skew = Mat3::Identity();
  skew(0, 1) = 0.1;
  EXPECT_THROW(RigidTransform(skew, Vec3::Zero()), InvalidPoseError);
}

TEST(Pose, AnglesWrapIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(-pi), pi);
  EXPECT_DOUBLE_EQ(wrap_angle(pi), pi);
  EXPECT_NEAR(wrap_angle(3 * pi + 0.25), -pi + 0.25, 1e-12);
  const Pose6D p = Pose6D::make(0, 0, 0, 7.0, -7.0, 4.0);
  for (double a : {p.roll, p.pitch, p.yaw}) {
    EXPECT_GT(a, -pi);
    EXPECT_LE(a, pi);
  }
}

TEST(Equirect, CenterPixelLooksForward) {
  const int w = 128, h = 64;
  const Vec3 d = dir_from_coord(w / 2.0 - 0.5, h / 2.0 - 0.5, w, h);
  EXPECT_LT((d - Vec3::UnitX()).norm(), 1e-12);
  const PixelCoord c = pixel_from_dir(Vec3::UnitX(), w, h);
  EXPECT_NEAR(c.u, w / 2.0 - 0.5, 1e-12);
  EXPECT_NEAR(c.v, h / 2.0 - 0.5, 1e-12);
}

TEST(Equirect, TopRowApproachesZenith) {
  for (int h : {64, 1024, 16384}) {
    const Vec3 d = dir_from_pixel(0, 0, 2 * h, h);
    EXPECT_NEAR(d.z(), 1.0, 2.0 * (pi / h) * (pi / h));
  }
}

TEST(Equirect, BackwardDirectionSitsOnTheSeam) {
  const int w = 128, h = 64;
  const PixelCoord c = pixel_from_dir(-Vec3::UnitX(), w, h);
  // The seam is the boundary between pixel W-1 and pixel 0.
  EXPECT_NEAR(c.u, w - 0.5, 1e-9);
  EXPECT_EQ(wrap_pixel_u(c.u, w), 0);
  EXPECT_EQ(wrap_pixel_u(c.u - 1e-6, w), w - 1);
}

TEST(Equirect, ExhaustivePixelRoundTrip) {
  const int w = 128, h = 64;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Vec3 d = dir_from_pixel(u, v, w, h);
      ASSERT_NEAR(d.norm(), 1.0, 1e-12);
      const PixelCoord c = pixel_from_dir(d, w, h);
      ASSERT_LE(std::abs(c.u - u), 0.5) << u << "," << v;
      ASSERT_LE(std::abs(c.v - v), 0.5) << u << "," << v;
      ASSERT_EQ(wrap_pixel_u(c.u, w), u);
      ASSERT_EQ(clamp_pixel_v(c.v, h), v);
    }
  }
}

TEST(Equirect, RandomDirectionsRoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const int w = 256, h = 128;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 d = Vec3(g(rng), g(rng), g(rng)).normalized();
    const PixelCoord c = pixel_from_dir(d, w, h);
    EXPECT_GE(c.u, 0.0);
    EXPECT_LT(c.u, w);
    const Vec3 back = dir_from_coord(c.u, c.v, w, h);
    EXPECT_LT(std::acos(std::clamp(back.dot(d), -1.0, 1.0)), 1e-6);
  }
}

TEST(Equirect, InvalidInputsRaise) {
  EXPECT_THROW(dir_from_pixel(128, 0, 128, 64), BoundsError);
  EXPECT_THROW(dir_from_pixel(0, -1, 128, 64), BoundsError);
  EXPECT_THROW(pixel_from_dir(Vec3::Zero(), 128, 64), InvalidDirectionError);
}

TEST(PointCloud, AllInvalidMaskGivesEmptyCloud) {
  Image rgb(16, 8, 3, 0.5f), depth(16, 8, 1, 1.0f, false);
  EXPECT_EQ(panorama_to_pointcloud(rgb, depth, Pose6D{}).size(), 0u);
}

TEST(PointCloud, UnitDepthAtOriginLiesOnUnitSphere) {
  Image rgb(32, 16, 3, 0.25f), depth(32, 16, 1, 1.0f);
  const auto cloud = panorama_to_pointcloud(rgb, depth, Pose6D{}, 7);
  ASSERT_EQ(cloud.size(), 32u * 16u);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_NEAR(cloud.positions[i].norm(), 1.0, 1e-6);
    EXPECT_EQ(cloud.view_ids[i], 7);
    EXPECT_FLOAT_EQ(cloud.colors[i].x(), 0.25f);
  }
}

TEST(PointCloud, PointsFollowThePose) {
  Image rgb(32, 16, 3), depth(32, 16, 1, 2.0f);
  const Pose6D pose = Pose6D::make(1, 2, 3, 0.1, 0.2, 0.3);
  const auto cloud = panorama_to_pointcloud(rgb, depth, pose);
  for (const Vec3& p : cloud.positions) {
    EXPECT_NEAR((p - pose.position()).norm(), 2.0, 1e-6);
  }
}

TEST(PointCloud, DimensionMismatchRaises) {
  Image rgb(32, 16, 3), depth(16, 8, 1);
  EXPECT_THROW(panorama_to_pointcloud(rgb, depth, Pose6D{}), ShapeError);
}

TEST(Dataset, SaveLoadRoundTripIsBitExact) {
  PanoramaDataset ds;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> uni(0, 1);
  for (int id : {0, 4}) {
    PanoramaView v;
    v.id = id;
    v.pose = Pose6D::make(id, -1, 1.6, 0, 0, 0.5 * id);
    v.rgb = Image(16, 8, 3);
    v.depth = Image(16, 8, 1);
    for (float& x : v.rgb.data()) x = uni(rng);
    v.rgb = quantize_rgb8(v.rgb);
    for (int j = 0; j < 8; ++j) {
      for (int i = 0; i < 16; ++i) {
        v.depth.at(i, j) = 1.0f + uni(rng);
        if ((i + j) % 7 == 0) {
          v.depth.at(i, j) = 0;
          v.depth.set_valid(i, j, false);
        }
      }
    }
    ds.views.push_back(std::move(v));
  }
  const auto dir = (std::filesystem::temp_directory_path() / "ibrsim_ds_rt");
  std::filesystem::remove_all(dir);
  ds.save(dir.string());
  const auto back = PanoramaDataset::load(dir.string());
  ASSERT_EQ(back.views.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.views[i].id, ds.views[i].id);
    EXPECT_EQ(back.views[i].pose, ds.views[i].pose);
    EXPECT_EQ(back.views[i].rgb, ds.views[i].rgb);
    EXPECT_EQ(back.views[i].depth, ds.views[i].depth);
  }
  EXPECT_THROW(PanoramaDataset::load((dir / "missing").string()), IoError);
}

}  // namespace
}  // namespace ibrsim::geom
