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

#include "ibrsim/mesh/bvh.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "ibrsim/common/error.hpp"

namespace ibrsim::mesh {

namespace {

constexpr double kMinT = 1e-9;

// Slab test; returns the entry distance or +inf on a miss.
double ray_box_entry(const Aabb& box, const Vec3& origin, const Vec3& inv_dir,
                     double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double near = (box.lo[a] - origin[a]) * inv_dir[a];
    double far = (box.hi[a] - origin[a]) * inv_dir[a];
    if (std::isnan(near) || std::isnan(far)) {
      // Zero direction component with origin on the slab boundary.
      if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) {
        return std::numeric_limits<double>::infinity();
      }
      continue;
    }
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

bool closer(const RayHit& a, const std::optional<RayHit>& best) {
  return !best || a.t < best->t || (a.t == best->t && a.face < best->face);
}

}  // namespace

std::optional<RayHit> intersect_triangle(const Vec3& origin, const Vec3& dir,
                                         const Vec3& v0, const Vec3& e1,
                                         const Vec3& e2) {
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - v0;
  const double b1 = s.dot(p) * inv;
  if (b1 < 0.0 || b1 > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double b2 = dir.dot(q) * inv;
  if (b2 < 0.0 || b1 + b2 > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (!(t > kMinT)) return std::nullopt;
  return RayHit{t, 0, b1, b2};
}

Bvh::Bvh(const TriangleMesh& mesh) {
  if (mesh.faces.empty()) throw EmptySceneError("cannot build a BVH without faces");
  const std::size_t n = mesh.faces.size();
  tri0_.resize(n);
  edge1_.resize(n);
  edge2_.resize(n);
  std::vector<Vec3> centroids(n);
  for (std::size_t f = 0; f < n; ++f) {
    const auto& t = mesh.faces[f];
    const Vec3& a = mesh.vertices.at(t[0]);
    const Vec3& b = mesh.vertices.at(t[1]);
    const Vec3& c = mesh.vertices.at(t[2]);
    tri0_[f] = a;
    edge1_[f] = b - a;
    edge2_[f] = c - a;
    centroids[f] = (a + b + c) / 3.0;
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * n);
  nodes_.emplace_back();
  build(0, 0, static_cast<std::uint32_t>(n), centroids);
}

void Bvh::build(std::uint32_t node, std::uint32_t begin, std::uint32_t end,
                const std::vector<Vec3>& centroids) {
  Aabb box, cbox;
  for (std::uint32_t i = begin; i < end; ++i) {
    const std::uint32_t f = order_[i];
    box.grow(tri0_[f]);
    box.grow(tri0_[f] + edge1_[f]);
    box.grow(tri0_[f] + edge2_[f]);
    cbox.grow(centroids[f]);
  }
  nodes_[node].box = box;
  const std::uint32_t count = end - begin;
  Vec3 extent = cbox.hi - cbox.lo;
  int axis = 0;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  if (count <= kMaxLeafSize) {
    nodes_[node].first = begin;
    nodes_[node].count = count;
    return;
  }
  const std::uint32_t mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (centroids[a][axis] != centroids[b][axis]) {
                       return centroids[a][axis] < centroids[b][axis];
                     }
                     return a < b;
                   });
  const auto left = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_.emplace_back();
  nodes_[node].first = left;
  nodes_[node].count = 0;
  build(left, begin, mid, centroids);
  build(left + 1, mid, end, centroids);
}

std::optional<RayHit> Bvh::raycast(const Vec3& origin, const Vec3& dir,
                                   double t_max) const {
  const Vec3 inv_dir = dir.cwiseInverse();
  std::optional<RayHit> best;
  std::array<std::uint32_t, 64> stack;
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const BvhNode& node = nodes_[stack[--sp]];
    const double limit = best ? best->t : t_max;
    if (ray_box_entry(node.box, origin, inv_dir, limit) ==
        std::numeric_limits<double>::infinity()) {
      continue;
    }
    if (node.is_leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t f = order_[i];
        auto hit = intersect_triangle(origin, dir, tri0_[f], edge1_[f],
                                      edge2_[f]);
        if (!hit || hit->t > t_max) continue;
        hit->face = f;
        if (closer(*hit, best)) best = hit;
      }
      continue;
    }
    // Visit the nearer child first.
    const std::uint32_t l = node.first, r = node.first + 1;
    const double tl = ray_box_entry(nodes_[l].box, origin, inv_dir, limit);
    const double tr = ray_box_entry(nodes_[r].box, origin, inv_dir, limit);
    if (tl <= tr) {
      stack[sp++] = r;
      stack[sp++] = l;
    } else {
      stack[sp++] = l;
      stack[sp++] = r;
    }
  }
  return best;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  // Region tests from Ericson, Real-Time Collision Detection, 5.1.5.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

Bvh::Nearest Bvh::nearest(const Vec3& p) const {
  Nearest best;
  double best_sq = std::numeric_limits<double>::infinity();
  std::array<std::uint32_t, 64> stack;
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const BvhNode& node = nodes_[stack[--sp]];
    if (node.box.distance_sq(p) > best_sq) continue;
    if (node.is_leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t f = order_[i];
        const Vec3 a = tri0_[f];
        const Vec3 q = closest_point_on_triangle(p, a, a + edge1_[f],
                                                 a + edge2_[f]);
        const double d = (q - p).squaredNorm();
        if (d < best_sq || (d == best_sq && f < best.face)) {
          best_sq = d;
          best.face = f;
          best.point = q;
        }
      }
      continue;
    }
    const std::uint32_t l = node.first, r = node.first + 1;
    const double dl = nodes_[l].box.distance_sq(p);
    const double dr = nodes_[r].box.distance_sq(p);
    if (dl <= dr) {
      stack[sp++] = r;
      stack[sp++] = l;
    } else {
      stack[sp++] = l;
      stack[sp++] = r;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

std::optional<RayHit> raycast_brute_force(const TriangleMesh& mesh,
                                          const Vec3& origin,
                                          const Vec3& dir) {
  std::optional<RayHit> best;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    const Vec3& a = mesh.vertices[t[0]];
    auto hit = intersect_triangle(origin, dir, a, mesh.vertices[t[1]] - a,
                                  mesh.vertices[t[2]] - a);
    if (!hit) continue;
    hit->face = static_cast<std::uint32_t>(f);
    if (closer(*hit, best)) best = hit;
  }
  return best;
}

}  // namespace ibrsim::mesh
