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

#include "ibrsim/mesh/collision.hpp"

#include "ibrsim/common/error.hpp"

namespace ibrsim::mesh {

CollisionResult sphere_collision(const TriangleMesh& /*mesh*/, const Bvh& bvh,
                                 const Vec3& center, double radius) {
  if (!(radius > 0)) throw InvalidArgumentError("sphere radius must be > 0");
  const auto nearest = bvh.nearest(center);
  return {nearest.distance < radius, nearest.distance, nearest.face};
}

bool body_collides(const TriangleMesh& mesh, const Bvh& bvh,
                   const AgentBody& body, const Vec3& floor_point) {
  for (double h : body.sphere_heights) {
    const Vec3 c = floor_point + Vec3(0, 0, h);
    if (sphere_collision(mesh, bvh, c, body.radius).colliding) return true;
  }
  return false;
}

}  // namespace ibrsim::mesh
