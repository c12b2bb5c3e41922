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

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ibrsim/mesh/mesh.hpp"

namespace ibrsim::mesh {

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool contains(const Aabb& b) const {
    return (lo.array() <= b.lo.array()).all() &&
           (hi.array() >= b.hi.array()).all();
  }
  // Squared distance from p to the box (0 inside).
  double distance_sq(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - hi);
    return d.squaredNorm();
  }
};

struct RayHit {
  double t = 0;
  std::uint32_t face = 0;
  double b1 = 0, b2 = 0;  // barycentric weights of vertices 1 and 2
};

struct BvhNode {
  Aabb box;
  // Interior: index of the left child (right = left + 1). Leaf: first index
  // into the face order.
  std::uint32_t first = 0;
  std::uint32_t count = 0;  // 0 for interior nodes
  bool is_leaf() const { return count > 0; }
};

// Binary bounding-volume hierarchy over mesh faces, leaf size <= 4. Holds a
// copy of the triangle positions so queries do not touch the mesh.
class Bvh {
 public:
  static constexpr std::uint32_t kMaxLeafSize = 4;

  // Throws EmptySceneError for a mesh without faces.
  explicit Bvh(const TriangleMesh& mesh);

  // Nearest hit with t > 1e-9; equal-t ties resolve to the lower face id.
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir,
                                double t_max =
                                    std::numeric_limits<double>::infinity())
      const;

  // Minimum distance from p to the surface and the face realizing it.
  struct Nearest {
    double distance = std::numeric_limits<double>::infinity();
    std::uint32_t face = 0;
    Vec3 point = Vec3::Zero();
  };
  Nearest nearest(const Vec3& p) const;

  const std::vector<BvhNode>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& face_order() const { return order_; }
  std::size_t face_count() const { return tri0_.size(); }

 private:
  void build(std::uint32_t node, std::uint32_t begin, std::uint32_t end,
             const std::vector<Vec3>& centroids);

  std::vector<BvhNode> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> tri0_, edge1_, edge2_;
};

// Intersection of a ray with one triangle (Moller-Trumbore, double). Returns
// t and barycentrics, or nullopt when missing or t <= 1e-9.
std::optional<RayHit> intersect_triangle(const Vec3& origin, const Vec3& dir,
                                         const Vec3& v0, const Vec3& e1,
                                         const Vec3& e2);

// Exhaustive reference used to validate the BVH.
std::optional<RayHit> raycast_brute_force(const TriangleMesh& mesh,
                                          const Vec3& origin, const Vec3& dir);

// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

}  // namespace ibrsim::mesh
