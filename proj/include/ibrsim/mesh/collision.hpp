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

#include <vector>

#include "ibrsim/mesh/bvh.hpp"

namespace ibrsim::mesh {

struct CollisionResult {
  bool colliding = false;
  double min_distance = 0;
  std::uint32_t witness_face = 0;
};

// colliding <=> distance from `center` to the surface < radius.
CollisionResult sphere_collision(const TriangleMesh& mesh, const Bvh& bvh,
                                 const Vec3& center, double radius);

// Agent body as a vertical stack of spheres, heights measured from the floor
// under the agent.
struct AgentBody {
  double radius = 0.2;
  std::vector<double> sphere_heights = {0.45, 0.85, 1.25, 1.6};
  double camera_height = 1.6;
  double max_step_up = 0.25;
};

bool body_collides(const TriangleMesh& mesh, const Bvh& bvh,
                   const AgentBody& body, const Vec3& floor_point);

}  // namespace ibrsim::mesh
