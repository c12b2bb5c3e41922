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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ibrsim/geometry/pose.hpp"

namespace ibrsim::mesh {

using geom::Vec3;
using Color = Eigen::Vector3f;

// Semantic classes emitted by the scene generator. Ids are rendered as-is.
enum SemanticClass : int {
  kUnlabeled = 0,
  kFloor = 1,
  kCeiling = 2,
  kWall = 3,
  kDoor = 4,
  kStairs = 5,
  kClutter = 6,
};

// Two-color checkerboard evaluated in the face plane.
struct Checker {
  double scale = 0.5;  // meters per square
  Color color2 = Color(0.2f, 0.2f, 0.2f);
  friend bool operator==(const Checker&, const Checker&) = default;
};

struct FaceMaterial {
  Color albedo = Color(0.7f, 0.7f, 0.7f);
  int semantic = kUnlabeled;
  std::optional<Checker> checker;
  friend bool operator==(const FaceMaterial&, const FaceMaterial&) = default;
};

using Face = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<FaceMaterial> materials;  // one per face

  std::size_t face_count() const { return faces.size(); }

  // Throws InvalidArgumentError on out-of-range indices, missing materials or
  // faces with area <= 1e-12 m^2.
  void validate() const;

  double face_area(std::size_t f) const;
  // Unit geometric normal following the face winding.
  Vec3 face_normal(std::size_t f) const;
  double surface_area() const;

  // Albedo at a surface point of face `f`, modulated by its checker.
  Color shade(std::size_t f, const Vec3& point) const;

  // Appends the vertices and faces of `other`, remapping indices.
  void append(const TriangleMesh& other);
  // Adds a planar quad (a, b, c, d in order) as two triangles.
  void add_quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                const FaceMaterial& mat);
  void add_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                    const FaceMaterial& mat);

  friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;
};

// OBJ subset (`v` and triangular `f` records) plus a `<stem>.labels.json`
// sidecar mapping face index -> {albedo, semantic, checker{scale, color2}}.
void save_obj(const TriangleMesh& mesh, const std::string& obj_path);
TriangleMesh load_obj(const std::string& obj_path);
std::string labels_path_for(const std::string& obj_path);

// Axis-aligned box with outward-facing faces (open_bottom drops the -z face,
// open_top the +z face).
TriangleMesh make_box(const Vec3& lo, const Vec3& hi, const FaceMaterial& mat,
                      bool open_bottom = false, bool open_top = false);
// Inward-facing box shell, as seen from inside a room.
TriangleMesh make_room_shell(const Vec3& lo, const Vec3& hi,
                             const FaceMaterial& floor,
                             const FaceMaterial& ceiling,
                             const FaceMaterial& wall);
// Geodesic-free UV sphere, radius r, centered at c.
TriangleMesh make_uv_sphere(const Vec3& c, double r, int stacks, int slices);

}  // namespace ibrsim::mesh
