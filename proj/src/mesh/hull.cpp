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

#include "ibrsim/mesh/hull.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ibrsim/common/error.hpp"

namespace ibrsim::mesh {

namespace {

struct HullFace {
  std::array<int, 3> v;
  Vec3 normal;
  double offset = 0;  // normal . x == offset on the plane
  std::vector<int> outside;
  bool alive = true;
};

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

class QuickHull {
 public:
  explicit QuickHull(const std::vector<Vec3>& pts) : pts_(pts) {
    double scale = 0;
    for (const Vec3& p : pts_) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    eps_ = 1e-10 * std::max(scale, 1.0);
  }

  std::vector<std::array<int, 3>> run() {
    if (pts_.size() < 4) throw DegenerateHullError("hull needs >= 4 points");
    initial_simplex();
    for (;;) {
      int fi = -1;
      for (std::size_t i = 0; i < faces_.size(); ++i) {
        if (faces_[i].alive && !faces_[i].outside.empty()) {
          fi = static_cast<int>(i);
          break;
        }
      }
      if (fi < 0) break;
      add_point(fi);
    }
    std::vector<std::array<int, 3>> out;
    for (const auto& f : faces_) {
      if (f.alive) out.push_back(f.v);
    }
    return out;
  }

 private:
  double dist(const HullFace& f, int p) const {
    return f.normal.dot(pts_[p]) - f.offset;
  }

  int make_face(int a, int b, int c) {
    HullFace f;
    f.v = {a, b, c};
    f.normal = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]).normalized();
    f.offset = f.normal.dot(pts_[a]);
    faces_.push_back(std::move(f));
    const int id = static_cast<int>(faces_.size()) - 1;
    edges_[edge_key(a, b)] = id;
    edges_[edge_key(b, c)] = id;
    edges_[edge_key(c, a)] = id;
    return id;
  }

  void initial_simplex() {
    const int n = static_cast<int>(pts_.size());
    // Extreme pair along the coordinate axes.
    std::array<int, 6> ext{};
    for (int a = 0; a < 3; ++a) {
      for (int i = 0; i < n; ++i) {
        if (pts_[i][a] < pts_[ext[2 * a]][a]) ext[2 * a] = i;
        if (pts_[i][a] > pts_[ext[2 * a + 1]][a]) ext[2 * a + 1] = i;
      }
    }
    int p0 = ext[0], p1 = ext[1];
    double best = -1;
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) {
        const double d = (pts_[ext[i]] - pts_[ext[j]]).squaredNorm();
        if (d > best) {
          best = d;
          p0 = ext[i];
          p1 = ext[j];
        }
      }
    }
    if (std::sqrt(best) <= eps_) throw DegenerateHullError("points coincide");
    const Vec3 axis = (pts_[p1] - pts_[p0]).normalized();
    int p2 = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const Vec3 d = pts_[i] - pts_[p0];
      const double off = (d - d.dot(axis) * axis).norm();
      if (off > best) {
        best = off;
        p2 = i;
      }
    }
    if (p2 < 0) throw DegenerateHullError("points are collinear");
    const Vec3 n012 =
        (pts_[p1] - pts_[p0]).cross(pts_[p2] - pts_[p0]).normalized();
    int p3 = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const double off = std::abs(n012.dot(pts_[i] - pts_[p0]));
      if (off > best) {
        best = off;
        p3 = i;
      }
    }
    if (p3 < 0) throw DegenerateHullError("points are coplanar");

    // Orient so every face looks away from the simplex interior.
    if (n012.dot(pts_[p3] - pts_[p0]) > 0) std::swap(p1, p2);
    make_face(p0, p1, p2);
    make_face(p0, p3, p1);
    make_face(p1, p3, p2);
    make_face(p2, p3, p0);

    for (int i = 0; i < n; ++i) {
      if (i == p0 || i == p1 || i == p2 || i == p3) continue;
      assign(i, 0, 4);
    }
  }

  void assign(int p, std::size_t first_face, std::size_t end_face) {
    for (std::size_t f = first_face; f < end_face; ++f) {
      if (faces_[f].alive && dist(faces_[f], p) > eps_) {
        faces_[f].outside.push_back(p);
        return;
      }
    }
  }

  void add_point(int start) {
    const HullFace& sf = faces_[start];
    int eye = sf.outside.front();
    double far = dist(sf, eye);
    for (int p : sf.outside) {
      const double d = dist(sf, p);
      if (d > far) {
        far = d;
        eye = p;
      }
    }
    // Flood-fill the faces visible from the eye point.
    std::vector<int> visible{start};
    std::vector<char> is_visible(faces_.size(), 0);
    is_visible[start] = 1;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const auto v = faces_[visible[k]].v;
      for (int e = 0; e < 3; ++e) {
        const int nb = edges_.at(edge_key(v[(e + 1) % 3], v[e]));
        if (!is_visible[nb] && faces_[nb].alive &&
            dist(faces_[nb], eye) > eps_) {
          is_visible[nb] = 1;
          visible.push_back(nb);
        }
      }
    }
    std::vector<std::pair<int, int>> horizon;
    std::vector<int> orphans;
    for (int fi : visible) {
      const auto v = faces_[fi].v;
      for (int e = 0; e < 3; ++e) {
        const int a = v[e], b = v[(e + 1) % 3];
        if (!is_visible[edges_.at(edge_key(b, a))]) horizon.emplace_back(a, b);
      }
      for (int p : faces_[fi].outside) {
        if (p != eye) orphans.push_back(p);
      }
      faces_[fi].alive = false;
      faces_[fi].outside.clear();
    }
    for (int fi : visible) {
      const auto v = faces_[fi].v;
      for (int e = 0; e < 3; ++e) {
        auto it = edges_.find(edge_key(v[e], v[(e + 1) % 3]));
        if (it != edges_.end() && it->second == fi) edges_.erase(it);
      }
    }
    const std::size_t first_new = faces_.size();
    for (auto [a, b] : horizon) make_face(a, b, eye);
    for (int p : orphans) assign(p, first_new, faces_.size());
  }

  const std::vector<Vec3>& pts_;
  double eps_ = 0;
  std::vector<HullFace> faces_;
  std::unordered_map<std::uint64_t, int> edges_;
};

}  // namespace

ConvexHull convex_hull(const std::vector<Vec3>& points) {
  ConvexHull hull;
  hull.points = points;
  QuickHull qh(hull.points);
  hull.faces = qh.run();
  return hull;
}

double ConvexHull::volume() const {
  // Signed tetrahedra from the centroid of the hull vertices.
  Vec3 c = Vec3::Zero();
  std::vector<char> used(points.size(), 0);
  int count = 0;
  for (const auto& f : faces) {
    for (int v : f) {
      if (!used[v]) {
        used[v] = 1;
        c += points[v];
        ++count;
      }
    }
  }
  c /= std::max(count, 1);
  double vol = 0;
  for (const auto& f : faces) {
    vol += (points[f[0]] - c).dot((points[f[1]] - c).cross(points[f[2]] - c));
  }
  return vol / 6.0;
}

double ConvexHull::area() const {
  double a = 0;
  for (const auto& f : faces) {
    a += 0.5 * (points[f[1]] - points[f[0]])
                   .cross(points[f[2]] - points[f[0]])
                   .norm();
  }
  return a;
}

double ssa(const TriangleMesh& mesh) {
  const double volume = convex_hull(mesh.vertices).volume();
  if (!(volume > 0)) throw DegenerateHullError("convex hull has no volume");
  return mesh.surface_area() / volume;
}

}  // namespace ibrsim::mesh
