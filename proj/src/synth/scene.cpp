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


#include "ibrsim/synth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <nlohmann/json.hpp>

#include "ibrsim/common/error.hpp"
#include "ibrsim/common/rng.hpp"
#include "ibrsim/mesh/collision.hpp"
#include "ibrsim/mesh/navigation.hpp"
#include "ibrsim/mesh/render.hpp"

namespace ibrsim::synth {

using mesh::Color;
using mesh::FaceMaterial;
using mesh::TriangleMesh;
using mesh::Vec3;
using nlohmann::json;

namespace {

void check_range(const Range& r, const char* name, bool allow_zero = false) {
  const bool ok = std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi &&
                  (allow_zero ? r.lo >= 0 : r.lo > 0);
  if (!ok) throw InvalidArgumentError(std::string("bad range for ") + name);
}

void check_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw InvalidArgumentError(std::string(name) + " must be > 0");
  }
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto& a = j.at(key);
  if (a.is_number()) return {a.get<double>(), a.get<double>()};
  if (!a.is_array() || a.size() != 2) {
    throw FormatError(std::string("expected [lo, hi] for ") + key);
  }
  return {a[0].get<double>(), a[1].get<double>()};
}

void count_from(const json& j, const char* key, int& lo, int& hi) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (a.is_number_integer()) {
    lo = hi = a.get<int>();
  } else if (a.is_array() && a.size() == 2) {
    lo = a[0].get<int>();
    hi = a[1].get<int>();
  } else {
    throw FormatError(std::string("expected count or [lo, hi] for ") + key);
  }
}

struct Rect {
  double x0, y0, x1, y1;
  bool overlaps(const Rect& o, double gap) const {
    return x0 < o.x1 + gap && o.x0 < x1 + gap && y0 < o.y1 + gap &&
           o.y0 < y1 + gap;
  }
};

struct Room {
  double x0, x1, y0, y1;
};

struct Door {
  double x;       // wall plane shared by the corridor end and the room
  double y0, y1;  // opening extent
};

Color random_color(Rng& rng, double lo, double hi) {
  const float r = static_cast<float>(rng.uniform(lo, hi));
  const float g = static_cast<float>(rng.uniform(lo, hi));
  const float b = static_cast<float>(rng.uniform(lo, hi));
  return {r, g, b};
}

FaceMaterial random_material(Rng& rng, int semantic, const Range& scale) {
  FaceMaterial m;
  m.albedo = random_color(rng, 0.45, 0.95);
  m.semantic = semantic;
  mesh::Checker c;
  c.scale = rng.uniform(scale.lo, scale.hi);
  c.color2 = random_color(rng, 0.05, 0.4);
  m.checker = c;
  return m;
}

// Quads on the plane x = const. `toward_positive` selects the normal side.
void wall_x(TriangleMesh& m, double x, double ya, double yb, double za,
            double zb, bool toward_positive, const FaceMaterial& mat) {
  if (yb - ya < 1e-9 || zb - za < 1e-9) return;
  if (toward_positive) {
    m.add_quad({x, ya, za}, {x, yb, za}, {x, yb, zb}, {x, ya, zb}, mat);
  } else {
    m.add_quad({x, ya, za}, {x, ya, zb}, {x, yb, zb}, {x, yb, za}, mat);
  }
}

void wall_y(TriangleMesh& m, double y, double xa, double xb, double za,
            double zb, bool toward_positive, const FaceMaterial& mat) {
  if (xb - xa < 1e-9 || zb - za < 1e-9) return;
  if (toward_positive) {
    m.add_quad({xa, y, za}, {xa, y, zb}, {xb, y, zb}, {xb, y, za}, mat);
  } else {
    m.add_quad({xa, y, za}, {xb, y, za}, {xb, y, zb}, {xa, y, zb}, mat);
  }
}

void horizontal(TriangleMesh& m, double z, double xa, double xb, double ya,
                double yb, bool up, const FaceMaterial& mat) {
  if (up) {
    m.add_quad({xa, ya, z}, {xb, ya, z}, {xb, yb, z}, {xa, yb, z}, mat);
  } else {
    m.add_quad({xa, ya, z}, {xa, yb, z}, {xb, yb, z}, {xb, ya, z}, mat);
  }
}

// A wall at x with an optional door opening, split into jambs and a lintel.
void wall_with_door(TriangleMesh& m, const Room& r, double x,
                    const std::optional<Door>& door, double h, double door_h,
                    bool toward_positive, const FaceMaterial& wall,
                    const FaceMaterial& lintel) {
  if (!door) {
    wall_x(m, x, r.y0, r.y1, 0, h, toward_positive, wall);
    return;
  }
  wall_x(m, x, r.y0, door->y0, 0, h, toward_positive, wall);
  wall_x(m, x, door->y1, r.y1, 0, h, toward_positive, wall);
  wall_x(m, x, door->y0, door->y1, door_h, h, toward_positive, lintel);
}

struct Layout {
  std::vector<Room> rooms;
  std::vector<Door> doors;  // doors[i] joins rooms i and i + 1
};

std::optional<Layout> try_layout(const SceneSpec& s, int n, Rng& rng) {
  Layout lay;
  double x = 0;
  for (int i = 0; i < n; ++i) {
    const double w = rng.uniform(s.room_width.lo, s.room_width.hi);
    const double d = rng.uniform(s.room_depth.lo, s.room_depth.hi);
    // The first room is centered on y = 0; later ones wander sideways.
    const double c = i == 0 ? 0.0 : rng.uniform(-0.25, 0.25) * d;
    lay.rooms.push_back({x, x + w, c - d / 2, c + d / 2});
    x += w + rng.uniform(s.corridor_length.lo, s.corridor_length.hi);
  }
  const double margin = 0.3 + s.corridor_width / 2;
  for (int i = 0; i + 1 < n; ++i) {
    const Room& a = lay.rooms[i];
    const Room& b = lay.rooms[i + 1];
    const double lo = std::max(a.y0, b.y0) + margin;
    const double hi = std::min(a.y1, b.y1) - margin;
    if (lo > hi) return std::nullopt;
    const double yc = rng.uniform(lo, hi);
    lay.doors.push_back({a.x1, yc - s.corridor_width / 2,
                         yc + s.corridor_width / 2});
  }
  if (s.stairs.steps > 0) {
    const Room& last = lay.rooms.back();
    const double need_x = s.stairs.steps * s.stairs.run + 2.0;
    const double need_y = s.stairs.width + 1.0;
    if (last.x1 - last.x0 < need_x || last.y1 - last.y0 < need_y) {
      return std::nullopt;
    }
    // The entry door must clear the stair footprint plus a walkway.
    if (!lay.doors.empty() &&
        lay.doors.back().y0 < last.y0 + s.stairs.width + 0.1) {
      return std::nullopt;
    }
  }
  return lay;
}

void add_stairs(TriangleMesh& m, const StairSpec& st, double sx, double y0,
                const FaceMaterial& mat) {
  const double y1 = y0 + st.width;
  for (int i = 0; i < st.steps; ++i) {
    const double xa = sx + i * st.run, xb = xa + st.run;
    const double za = i * st.rise, zb = (i + 1) * st.rise;
    wall_x(m, xa, y0, y1, za, zb, false, mat);        // riser
    horizontal(m, zb, xa, xb, y0, y1, true, mat);     // tread
    wall_y(m, y1, xa, xb, 0, zb, false, mat);         // open side
  }
  wall_x(m, sx + st.steps * st.run, y0, y1, 0, st.steps * st.rise, true, mat);
}

}  // namespace

void SceneSpec::validate() const {
  if (room_count_min < 1 || room_count_max < room_count_min) {
    throw InvalidArgumentError("room count range must satisfy 1 <= lo <= hi");
  }
  check_range(room_width, "room_width");
  check_range(room_depth, "room_depth");
  check_positive(room_height, "room_height");
  check_positive(corridor_width, "corridor_width");
  check_range(corridor_length, "corridor_length");
  check_positive(door_height, "door_height");
  if (door_height > room_height) {
    throw InvalidArgumentError("door_height exceeds room_height");
  }
  if (stairs.steps < 0) throw InvalidArgumentError("stairs.steps must be >= 0");
  if (stairs.steps > 0) {
    check_positive(stairs.rise, "stairs.rise");
    check_positive(stairs.run, "stairs.run");
    check_positive(stairs.width, "stairs.width");
    if (stairs.steps * stairs.rise >= room_height - 0.1) {
      throw InvalidArgumentError("stairway does not fit under the ceiling");
    }
  }
  check_range(checker_scale, "checker_scale");
  if (clutter_min < 0 || clutter_max < clutter_min) {
    throw InvalidArgumentError("clutter count range must satisfy 0 <= lo <= hi");
  }
  check_range(clutter_size, "clutter_size");
  check_range(clutter_height, "clutter_height");
}

SceneSpec scene_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("scene spec: ") + e.what());
  }
  SceneSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    if (j.contains("rooms")) {
      const auto& r = j.at("rooms");
      count_from(r, "count", s.room_count_min, s.room_count_max);
      s.room_width = range_from(r, "width", s.room_width);
      s.room_depth = range_from(r, "depth", s.room_depth);
      s.room_height = r.value("height", s.room_height);
    }
    if (j.contains("corridor")) {
      const auto& c = j.at("corridor");
      s.corridor_width = c.value("width", s.corridor_width);
      s.corridor_length = range_from(c, "length", s.corridor_length);
      s.door_height = c.value("door_height", s.door_height);
    }
    if (j.contains("stairs")) {
      const auto& st = j.at("stairs");
      s.stairs.steps = st.value("steps", s.stairs.steps);
      s.stairs.rise = st.value("rise", s.stairs.rise);
      s.stairs.run = st.value("run", s.stairs.run);
      s.stairs.width = st.value("width", s.stairs.width);
    }
    if (j.contains("checker")) {
      s.checker_scale = range_from(j.at("checker"), "scale", s.checker_scale);
    }
    if (j.contains("clutter")) {
      const auto& c = j.at("clutter");
      count_from(c, "count", s.clutter_min, s.clutter_max);
      s.clutter_size = range_from(c, "size", s.clutter_size);
      s.clutter_height = range_from(c, "height", s.clutter_height);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("scene spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string scene_spec_to_json(const SceneSpec& s) {
  const json j = {
      {"seed", s.seed},
      {"rooms",
       {{"count", json::array({s.room_count_min, s.room_count_max})},
        {"width", range_json(s.room_width)},
        {"depth", range_json(s.room_depth)},
        {"height", s.room_height}}},
      {"corridor",
       {{"width", s.corridor_width},
        {"length", range_json(s.corridor_length)},
        {"door_height", s.door_height}}},
      {"stairs",
       {{"steps", s.stairs.steps},
        {"rise", s.stairs.rise},
        {"run", s.stairs.run},
        {"width", s.stairs.width}}},
      {"checker", {{"scale", range_json(s.checker_scale)}}},
      {"clutter",
       {{"count", json::array({s.clutter_min, s.clutter_max})},
        {"size", range_json(s.clutter_size)},
        {"height", range_json(s.clutter_height)}}}};
  return j.dump(2);
}

TriangleMesh generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int n = rng.uniform_int(spec.room_count_min, spec.room_count_max);
  std::optional<Layout> layout;
  for (int attempt = 0; attempt < kLayoutRetries && !layout; ++attempt) {
    layout = try_layout(spec, n, rng);
  }
  if (!layout) {
    throw GenerationError("no room layout fits the spec after " +
                          std::to_string(kLayoutRetries) + " attempts");
  }
  const double h = spec.room_height, dh = spec.door_height;
  TriangleMesh m;
  for (int i = 0; i < n; ++i) {
    const Room& r = layout->rooms[i];
    const FaceMaterial floor = random_material(rng, mesh::kFloor,
                                               spec.checker_scale);
    const FaceMaterial ceil = random_material(rng, mesh::kCeiling,
                                              spec.checker_scale);
    const FaceMaterial wall = random_material(rng, mesh::kWall,
                                              spec.checker_scale);
    const FaceMaterial door = random_material(rng, mesh::kDoor,
                                              spec.checker_scale);
    horizontal(m, 0, r.x0, r.x1, r.y0, r.y1, true, floor);
    horizontal(m, h, r.x0, r.x1, r.y0, r.y1, false, ceil);
    std::optional<Door> left, right;
    if (i > 0) left = layout->doors[i - 1];
    if (i + 1 < n) right = layout->doors[i];
    wall_with_door(m, r, r.x0, left, h, dh, true, wall, door);
    wall_with_door(m, r, r.x1, right, h, dh, false, wall, door);
    wall_y(m, r.y0, r.x0, r.x1, 0, h, true, wall);
    wall_y(m, r.y1, r.x0, r.x1, 0, h, false, wall);

    if (right) {
      // Corridor from this room's +x wall to the next room's -x wall.
      const double xa = r.x1, xb = layout->rooms[i + 1].x0;
      const double ya = right->y0, yb = right->y1;
      horizontal(m, 0, xa, xb, ya, yb, true, floor);
      horizontal(m, dh, xa, xb, ya, yb, false, ceil);
      wall_y(m, ya, xa, xb, 0, dh, true, wall);
      wall_y(m, yb, xa, xb, 0, dh, false, wall);
    }

    std::vector<Rect> keep_out;
    const double g = kClutterClearance;
    if (left) keep_out.push_back({r.x0, left->y0 - g, r.x0 + 1.0, left->y1 + g});
    if (right) {
      keep_out.push_back({r.x1 - 1.0, right->y0 - g, r.x1, right->y1 + g});
    }
    if (i == n - 1 && spec.stairs.steps > 0) {
      const double sx = r.x0 + 1.0;
      FaceMaterial stairs = random_material(rng, mesh::kStairs,
                                            spec.checker_scale);
      add_stairs(m, spec.stairs, sx, r.y0, stairs);
      keep_out.push_back({sx, r.y0, sx + spec.stairs.steps * spec.stairs.run,
                          r.y0 + spec.stairs.width});
    }

    const int boxes = rng.uniform_int(spec.clutter_min, spec.clutter_max);
    for (int b = 0; b < boxes; ++b) {
      bool placed = false;
      for (int attempt = 0; attempt < kClutterRetries && !placed; ++attempt) {
        const double sx = rng.uniform(spec.clutter_size.lo, spec.clutter_size.hi);
        const double sy = rng.uniform(spec.clutter_size.lo, spec.clutter_size.hi);
        const double lo_x = r.x0 + g, hi_x = r.x1 - g - sx;
        const double lo_y = r.y0 + g, hi_y = r.y1 - g - sy;
        if (lo_x > hi_x || lo_y > hi_y) continue;
        const double bx = rng.uniform(lo_x, hi_x), by = rng.uniform(lo_y, hi_y);
        const Rect box{bx, by, bx + sx, by + sy};
        const bool clash = std::any_of(
            keep_out.begin(), keep_out.end(),
            [&](const Rect& k) { return box.overlaps(k, g); });
        if (clash) continue;
        const double bh = rng.uniform(spec.clutter_height.lo,
                                      spec.clutter_height.hi);
        const FaceMaterial mat = random_material(rng, mesh::kClutter,
                                                 spec.checker_scale);
        m.append(mesh::make_box({bx, by, 0}, {bx + sx, by + sy, bh}, mat,
                                true));
        keep_out.push_back(box);
        placed = true;
      }
      if (!placed) {
        throw GenerationError("could not place clutter box " +
                              std::to_string(b) + " in room " +
                              std::to_string(i));
      }
    }
  }
  m.validate();
  return m;
}

FreeSpace free_space(const TriangleMesh& mesh, const mesh::Bvh& bvh,
                     const PoseSampling& cfg) {
  check_positive(cfg.cell, "cell");
  check_positive(cfg.agent_radius, "agent_radius");
  mesh::AgentBody body;
  body.radius = cfg.agent_radius;
  body.camera_height = cfg.camera_height;
  FreeSpace out;
  out.grid = mesh::occupancy_grid(mesh, bvh, cfg.cell, {}, body);
  int count = 0;
  const std::vector<int> label = mesh::connected_components(out.grid, &count);
  if (count == 0) throw GenerationError("no traversable space in the scene");
  std::vector<std::size_t> size(count, 0);
  for (int l : label) {
    if (l >= 0) ++size[l];
  }
  const int best = static_cast<int>(
      std::max_element(size.begin(), size.end()) - size.begin());
  for (const mesh::Cell& c : out.grid.free_cells()) {
    if (label[out.grid.index(c)] == best) out.cells.push_back(c);
  }
  return out;
}

std::vector<geom::Pose6D> sample_panorama_poses(const TriangleMesh& mesh,
                                                const mesh::Bvh& bvh,
                                                double density,
                                                const PoseSampling& cfg) {
  check_positive(density, "density");
  FreeSpace space = free_space(mesh, bvh, cfg);
  const mesh::OccupancyGrid& grid = space.grid;
  std::vector<mesh::Cell>& cells = space.cells;
  Rng rng(cfg.seed);
  for (std::size_t i = cells.size(); i > 1; --i) {
    std::swap(cells[i - 1], cells[rng.next() % i]);
  }
  const auto target = static_cast<std::size_t>(
      std::max(1.0, std::round(space.area() * density)));
  const double min_gap = 2 * cfg.agent_radius;

  std::vector<double> gap(cells.size(), std::numeric_limits<double>::infinity());
  std::vector<geom::Pose6D> poses;
  std::size_t pick = 0;
  while (poses.size() < target) {
    const Vec3 c = grid.center(cells[pick]);
    const Vec3 eye(c.x(), c.y(), c.z() + cfg.camera_height);
    if (!mesh::sphere_collision(mesh, bvh, eye, cfg.agent_radius).colliding) {
      poses.push_back(geom::Pose6D::make(eye.x(), eye.y(), eye.z(), 0, 0,
                                         rng.uniform(-std::numbers::pi,
                                                     std::numbers::pi)));
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const Vec3 o = grid.center(cells[k]);
        gap[k] = std::min(gap[k], std::hypot(o.x() - c.x(), o.y() - c.y()));
      }
    } else {
      gap[pick] = 0;
    }
    pick = static_cast<std::size_t>(
        std::max_element(gap.begin(), gap.end()) - gap.begin());
    if (gap[pick] < min_gap) break;
  }
  return poses;
}

geom::PanoramaView render_oracle_panorama(const TriangleMesh& mesh,
                                          const mesh::Bvh& bvh,
                                          const geom::Pose6D& pose, int width,
                                          int height, int id) {
  geom::PanoramaView v;
  v.id = id;
  v.pose = pose;
  v.rgb = quantize_rgb8(mesh::render_equirect(mesh, bvh, pose, width, height,
                                              mesh::Modality::kAlbedo));
  v.depth = mesh::render_equirect(mesh, bvh, pose, width, height,
                                  mesh::Modality::kDepth);
  return v;
}

geom::PanoramaDataset generate_dataset(const TriangleMesh& mesh,
                                       const mesh::Bvh& bvh, double density,
                                       int width, int height,
                                       const PoseSampling& cfg) {
  geom::PanoramaDataset ds;
  const auto poses = sample_panorama_poses(mesh, bvh, density, cfg);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    ds.views.push_back(render_oracle_panorama(mesh, bvh, poses[i], width,
                                              height, static_cast<int>(i)));
  }
  return ds;
}

}  // namespace ibrsim::synth
