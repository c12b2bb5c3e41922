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

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ibrsim::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Camera or agent pose. Angles are radians, normalized to (-pi, pi].
// Rotation convention: intrinsic Z-Y-X, R = Rz(yaw) * Ry(pitch) * Rx(roll),
// camera frame x forward, y left, z up.
struct Pose6D {
  double x = 0, y = 0, z = 0;
  double roll = 0, pitch = 0, yaw = 0;

  // Validates finiteness and wraps the angles; throws InvalidPoseError.
  static Pose6D make(double x, double y, double z, double roll, double pitch,
                     double yaw);

  Vec3 position() const { return {x, y, z}; }
  friend bool operator==(const Pose6D&, const Pose6D&) = default;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

class RigidTransform {
 public:
  RigidTransform() = default;
  // `rotation` must be orthonormal with det +1 within 1e-9.
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_rotation(const Vec3& d) const { return rotation_ * d; }

  RigidTransform inverse() const;
  // (a * b).apply(p) == a.apply(b.apply(p))
  friend RigidTransform operator*(const RigidTransform& a,
                                  const RigidTransform& b);

  bool is_near(const RigidTransform& other, double tol) const;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

// Camera-to-world transform of a pose.
RigidTransform pose_to_transform(const Pose6D& p);

}  // namespace ibrsim::geom
