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

#include "ibrsim/mesh/mesh.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ibrsim/common/bytes.hpp"
#include "ibrsim/common/error.hpp"

namespace ibrsim::mesh {

using nlohmann::json;

void TriangleMesh::validate() const {
  if (materials.size() != faces.size()) {
    throw InvalidArgumentError("mesh needs exactly one material per face");
  }
  for (const Vec3& v : vertices) {
    if (!v.allFinite()) throw InvalidArgumentError("non-finite mesh vertex");
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto idx : faces[f]) {
      if (idx >= vertices.size()) {
        throw InvalidArgumentError("face " + std::to_string(f) +
                                   " has an out-of-range vertex index");
      }
    }
    if (!(face_area(f) > 1e-12)) {
      throw InvalidArgumentError("face " + std::to_string(f) +
                                 " is degenerate");
    }
  }
}

double TriangleMesh::face_area(std::size_t f) const {
  const auto& t = faces[f];
  return 0.5 * (vertices[t[1]] - vertices[t[0]])
                   .cross(vertices[t[2]] - vertices[t[0]])
                   .norm();
}

Vec3 TriangleMesh::face_normal(std::size_t f) const {
  const auto& t = faces[f];
  return (vertices[t[1]] - vertices[t[0]])
      .cross(vertices[t[2]] - vertices[t[0]])
      .normalized();
}

double TriangleMesh::surface_area() const {
  double total = 0;
  for (std::size_t f = 0; f < faces.size(); ++f) total += face_area(f);
  return total;
}

Color TriangleMesh::shade(std::size_t f, const Vec3& point) const {
  const FaceMaterial& m = materials[f];
  if (!m.checker) return m.albedo;
  // Project onto the two axes orthogonal to the dominant normal axis so
  // that coplanar faces share one continuous pattern.
  const Vec3 n = face_normal(f).cwiseAbs();
  int drop = 0;
  if (n.y() > n[drop]) drop = 1;
  if (n.z() > n[drop]) drop = 2;
  const int a = (drop + 1) % 3, b = (drop + 2) % 3;
  const double s = m.checker->scale;
  const long ia = static_cast<long>(std::floor(point[a] / s));
  const long ib = static_cast<long>(std::floor(point[b] / s));
  return ((ia + ib) & 1) == 0 ? m.albedo : m.checker->color2;
}

void TriangleMesh::append(const TriangleMesh& other) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const Face& f : other.faces) {
    faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  }
  materials.insert(materials.end(), other.materials.begin(),
                   other.materials.end());
}

void TriangleMesh::add_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                                const FaceMaterial& mat) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), {a, b, c});
  faces.push_back({base, base + 1, base + 2});
  materials.push_back(mat);
}

void TriangleMesh::add_quad(const Vec3& a, const Vec3& b, const Vec3& c,
                            const Vec3& d, const FaceMaterial& mat) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), {a, b, c, d});
  faces.push_back({base, base + 1, base + 2});
  faces.push_back({base, base + 2, base + 3});
  materials.push_back(mat);
  materials.push_back(mat);
}

std::string labels_path_for(const std::string& obj_path) {
  std::filesystem::path p(obj_path);
  p.replace_extension();
  return p.string() + ".labels.json";
}

namespace {

json color_json(const Color& c) { return json::array({c.x(), c.y(), c.z()}); }

Color color_from(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw FormatError("labels: color must be [r, g, b]");
  }
  return Color(j[0].get<float>(), j[1].get<float>(), j[2].get<float>());
}

}  // namespace

void save_obj(const TriangleMesh& mesh, const std::string& obj_path) {
  std::ostringstream out;
  out.precision(17);
  for (const Vec3& v : mesh.vertices) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const Face& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  write_text_file(obj_path, out.str());

  json labels = json::object();
  for (std::size_t f = 0; f < mesh.materials.size(); ++f) {
    const FaceMaterial& m = mesh.materials[f];
    json entry = {{"albedo", color_json(m.albedo)}, {"semantic", m.semantic}};
    if (m.checker) {
      entry["checker"] = {{"scale", m.checker->scale},
                          {"color2", color_json(m.checker->color2)}};
    }
    labels[std::to_string(f)] = std::move(entry);
  }
  write_text_file(labels_path_for(obj_path), labels.dump());
}

TriangleMesh load_obj(const std::string& obj_path) {
  TriangleMesh mesh;
  std::istringstream in(read_text_file(obj_path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        throw FormatError(obj_path + ":" + std::to_string(line_no) +
                          ": bad vertex");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ls >> tok) {
        // Accept "i", "i/t", "i/t/n", "i//n"; only the position index is used.
        try {
          idx.push_back(std::stol(tok.substr(0, tok.find('/'))));
        } catch (const std::logic_error&) {
          throw FormatError(obj_path + ":" + std::to_string(line_no) +
                            ": bad face index");
        }
      }
      if (idx.size() != 3) {
        throw FormatError(obj_path + ":" + std::to_string(line_no) +
                          ": only triangular faces are supported");
      }
      Face f{};
      for (int k = 0; k < 3; ++k) {
        const long i = idx[k] < 0 ? static_cast<long>(mesh.vertices.size()) +
                                        idx[k]
                                  : idx[k] - 1;
        if (i < 0) throw FormatError("face index out of range");
        f[k] = static_cast<std::uint32_t>(i);
      }
      mesh.faces.push_back(f);
    }
  }
  mesh.materials.assign(mesh.faces.size(), FaceMaterial{});

  const std::string labels_path = labels_path_for(obj_path);
  if (std::filesystem::exists(labels_path)) {
    json labels;
    try {
      labels = json::parse(read_text_file(labels_path));
      for (const auto& [key, entry] : labels.items()) {
        const std::size_t f = std::stoul(key);
        if (f >= mesh.materials.size()) {
          throw FormatError("labels refer to face " + key +
                            " beyond the mesh");
        }
        FaceMaterial& m = mesh.materials[f];
        if (entry.contains("albedo")) m.albedo = color_from(entry["albedo"]);
        if (entry.contains("semantic")) m.semantic = entry["semantic"];
        if (entry.contains("checker")) {
          m.checker = Checker{entry["checker"].at("scale").get<double>(),
                              color_from(entry["checker"].at("color2"))};
        }
      }
    } catch (const json::exception& e) {
      throw FormatError(labels_path + ": " + e.what());
    } catch (const std::logic_error& e) {
      throw FormatError(labels_path + ": bad face key");
    }
  }
  mesh.validate();
  return mesh;
}

TriangleMesh make_box(const Vec3& lo, const Vec3& hi, const FaceMaterial& mat,
                      bool open_bottom, bool open_top) {
  TriangleMesh m;
  const double x0 = lo.x(), y0 = lo.y(), z0 = lo.z();
  const double x1 = hi.x(), y1 = hi.y(), z1 = hi.z();
  // Counter-clockwise seen from outside.
  m.add_quad({x0, y0, z0}, {x0, y1, z0}, {x0, y1, z1}, {x0, y0, z1}, mat);  // -x
  m.add_quad({x1, y0, z0}, {x1, y0, z1}, {x1, y1, z1}, {x1, y1, z0}, mat);  // +x
  m.add_quad({x0, y0, z0}, {x0, y0, z1}, {x1, y0, z1}, {x1, y0, z0}, mat);  // -y
  m.add_quad({x0, y1, z0}, {x1, y1, z0}, {x1, y1, z1}, {x0, y1, z1}, mat);  // +y
  if (!open_bottom) {
    m.add_quad({x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0}, mat);
  }
  if (!open_top) {
    m.add_quad({x0, y0, z1}, {x0, y1, z1}, {x1, y1, z1}, {x1, y0, z1}, mat);
  }
  // Flip the bottom winding so it faces -z.
  if (!open_bottom) {
    const std::size_t b = open_top ? m.faces.size() - 2 : m.faces.size() - 4;
    std::swap(m.faces[b][1], m.faces[b][2]);
    std::swap(m.faces[b + 1][1], m.faces[b + 1][2]);
  }
  return m;
}

TriangleMesh make_room_shell(const Vec3& lo, const Vec3& hi,
                             const FaceMaterial& floor,
                             const FaceMaterial& ceiling,
                             const FaceMaterial& wall) {
  const double x0 = lo.x(), y0 = lo.y(), z0 = lo.z();
  const double x1 = hi.x(), y1 = hi.y(), z1 = hi.z();
  TriangleMesh m;
  // Wound so that normals point into the room.
  m.add_quad({x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0}, floor);
  m.add_quad({x0, y0, z1}, {x0, y1, z1}, {x1, y1, z1}, {x1, y0, z1}, ceiling);
  m.add_quad({x0, y0, z0}, {x0, y1, z0}, {x0, y1, z1}, {x0, y0, z1}, wall);
  m.add_quad({x1, y0, z0}, {x1, y0, z1}, {x1, y1, z1}, {x1, y1, z0}, wall);
  m.add_quad({x0, y0, z0}, {x0, y0, z1}, {x1, y0, z1}, {x1, y0, z0}, wall);
  m.add_quad({x0, y1, z0}, {x1, y1, z0}, {x1, y1, z1}, {x0, y1, z1}, wall);
  return m;
}

TriangleMesh make_uv_sphere(const Vec3& c, double r, int stacks, int slices) {
  TriangleMesh m;
  auto point = [&](int i, int j) {
    const double theta = std::numbers::pi * i / stacks;
    const double phi = 2.0 * std::numbers::pi * j / slices;
    return Vec3(c.x() + r * std::sin(theta) * std::cos(phi),
                c.y() + r * std::sin(theta) * std::sin(phi),
                c.z() + r * std::cos(theta));
  };
  for (int i = 0; i <= stacks; ++i) {
    for (int j = 0; j < slices; ++j) m.vertices.push_back(point(i, j));
  }
  auto idx = [&](int i, int j) {
    return static_cast<std::uint32_t>(i * slices + (j % slices));
  };
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      if (i > 0) m.faces.push_back({idx(i, j), idx(i + 1, j), idx(i, j + 1)});
      if (i + 1 < stacks) {
        m.faces.push_back({idx(i, j + 1), idx(i + 1, j), idx(i + 1, j + 1)});
      }
    }
  }
  m.materials.assign(m.faces.size(), FaceMaterial{});
  return m;
}

}  // namespace ibrsim::mesh
