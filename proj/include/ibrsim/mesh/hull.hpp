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

#include <array>
#include <vector>

#include "ibrsim/mesh/mesh.hpp"

namespace ibrsim::mesh {

struct ConvexHull {
  std::vector<Vec3> points;                 // input points (copied)
  std::vector<std::array<int, 3>> faces;    // outward-wound triangles

  double volume() const;
  double area() const;
};

// 3-D quickhull. Throws DegenerateHullError when the points are (nearly)
// coplanar or fewer than 4.
ConvexHull convex_hull(const std::vector<Vec3>& points);

// Specific surface area: total mesh face area over convex-hull volume.
double ssa(const TriangleMesh& mesh);

}  // namespace ibrsim::mesh
