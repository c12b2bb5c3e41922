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

#include "ibrsim/geometry/pose.hpp"

#include <cmath>
#include <numbers>

#include "ibrsim/common/error.hpp"

namespace ibrsim::geom {

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  if (r > std::numbers::pi) r -= kTwoPi;
  return r;
}

Pose6D Pose6D::make(double x, double y, double z, double roll, double pitch,
                    double yaw) {
  for (double v : {x, y, z, roll, pitch, yaw}) {
    if (!std::isfinite(v)) throw InvalidPoseError("pose has non-finite field");
  }
  return Pose6D{x, y, z, wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)};
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidPoseError("transform has non-finite entries");
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidPoseError("rotation is not a proper orthonormal matrix");
  }
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation_ = a.rotation_ * b.rotation_;
  out.translation_ = a.rotation_ * b.translation_ + a.translation_;
  return out;
}

bool RigidTransform::is_near(const RigidTransform& other, double tol) const {
  return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

RigidTransform pose_to_transform(const Pose6D& p) {
  for (double v : {p.x, p.y, p.z, p.roll, p.pitch, p.yaw}) {
    if (!std::isfinite(v)) throw InvalidPoseError("pose has non-finite field");
  }
  const Mat3 r = (Eigen::AngleAxisd(p.yaw, Vec3::UnitZ()) *
                  Eigen::AngleAxisd(p.pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(p.roll, Vec3::UnitX()))
                     .toRotationMatrix();
  return RigidTransform(r, p.position());
}

}  // namespace ibrsim::geom
