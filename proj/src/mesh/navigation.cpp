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

#include "ibrsim/mesh/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "ibrsim/common/error.hpp"
#include "ibrsim/common/rng.hpp"

namespace ibrsim::mesh {

Vec3 OccupancyGrid::center(Cell c) const {
  const double z = has_floor[index(c)] ? floor_z[index(c)] : 0.0;
  return {origin_x + (c.i + 0.5) * cell, origin_y + (c.j + 0.5) * cell, z};
}

Cell OccupancyGrid::cell_of(double x, double y) const {
  return {static_cast<int>(std::floor((x - origin_x) / cell)),
          static_cast<int>(std::floor((y - origin_y) / cell))};
}

std::vector<Cell> OccupancyGrid::free_cells() const {
  std::vector<Cell> out;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (traversable[index({i, j})]) out.push_back({i, j});
    }
  }
  return out;
}

std::size_t OccupancyGrid::free_count() const {
  return static_cast<std::size_t>(
      std::count(traversable.begin(), traversable.end(), std::uint8_t{1}));
}

double OccupancyGrid::floor_area() const {
  const auto n = std::count(has_floor.begin(), has_floor.end(), std::uint8_t{1});
  return static_cast<double>(n) * cell * cell;
}

std::optional<double> floor_height(const Bvh& bvh, const TriangleMesh& mesh,
                                   double x, double y, const FloorBand& band) {
  const Vec3 origin(x, y, band.z_max + kFloorProbeClearance);
  const auto hit = bvh.raycast(origin, Vec3(0, 0, -1));
  if (!hit) return std::nullopt;
  const double z = origin.z() - hit->t;
  if (z < band.z_min || z > band.z_max) return std::nullopt;
  if (std::abs(mesh.face_normal(hit->face).z()) < 0.7) return std::nullopt;
  return z;
}

OccupancyGrid occupancy_grid(const TriangleMesh& mesh, const Bvh& bvh,
                             double cell, const FloorBand& band,
                             const AgentBody& body) {
  if (!(cell > 0)) throw InvalidArgumentError("cell size must be > 0");
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const Vec3& v : mesh.vertices) {
    x0 = std::min(x0, v.x());
    y0 = std::min(y0, v.y());
    x1 = std::max(x1, v.x());
    y1 = std::max(y1, v.y());
  }
  OccupancyGrid g;
  g.cell = cell;
  g.origin_x = x0;
  g.origin_y = y0;
  g.nx = std::max(1, static_cast<int>(std::ceil((x1 - x0) / cell - 1e-9)));
  g.ny = std::max(1, static_cast<int>(std::ceil((y1 - y0) / cell - 1e-9)));
  const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
  g.traversable.assign(n, 0);
  g.has_floor.assign(n, 0);
  g.floor_z.assign(n, 0.0f);
#pragma omp parallel for schedule(dynamic, 8)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double x = x0 + (i + 0.5) * cell, y = y0 + (j + 0.5) * cell;
      const auto z = floor_height(bvh, mesh, x, y, band);
      if (!z) continue;
      const std::size_t k = g.index({i, j});
      g.has_floor[k] = 1;
      g.floor_z[k] = static_cast<float>(*z);
      g.traversable[k] = body_collides(mesh, bvh, body, Vec3(x, y, *z)) ? 0 : 1;
    }
  }
  return g;
}

std::vector<int> connected_components(const OccupancyGrid& grid,
                                      int* component_count) {
  std::vector<int> label(grid.traversable.size(), -1);
  int next = 0;
  std::vector<Cell> stack;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Cell seed{i, j};
      if (!grid.free(seed) || label[grid.index(seed)] >= 0) continue;
      label[grid.index(seed)] = next;
      stack.push_back(seed);
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (const Cell d : {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
          const Cell nb{c.i + d.i, c.j + d.j};
          if (grid.free(nb) && label[grid.index(nb)] < 0) {
            label[grid.index(nb)] = next;
            stack.push_back(nb);
          }
        }
      }
      ++next;
    }
  }
  if (component_count) *component_count = next;
  return label;
}

double GridPath::length(double cell) const {
  return (straight_moves + diagonal_moves * std::numbers::sqrt2) * cell;
}

std::optional<GridPath> astar(const OccupancyGrid& grid, Cell start,
                              Cell goal) {
  if (!grid.free(start) || !grid.free(goal)) return std::nullopt;
  const std::size_t n = grid.traversable.size();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<char> closed(n, 0);
  auto h = [&](Cell c) {
    return std::hypot(static_cast<double>(c.i - goal.i),
                      static_cast<double>(c.j - goal.j));
  };
  using Entry = std::pair<double, std::size_t>;  // (f, index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t s = grid.index(start), t = grid.index(goal);
  g[s] = 0;
  open.push({h(start), s});
  while (!open.empty()) {
    const auto [f, k] = open.top();
    open.pop();
    if (closed[k]) continue;
    closed[k] = 1;
    if (k == t) break;
    const Cell c{static_cast<int>(k % grid.nx), static_cast<int>(k / grid.nx)};
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const Cell nb{c.i + di, c.j + dj};
        if (!grid.free(nb)) continue;
        const bool diag = di != 0 && dj != 0;
        if (diag && (!grid.free({c.i + di, c.j}) || !grid.free({c.i, c.j + dj}))) {
          continue;  // no corner cutting
        }
        const std::size_t nk = grid.index(nb);
        if (closed[nk]) continue;
        const double cand = g[k] + (diag ? std::numbers::sqrt2 : 1.0);
        if (cand < g[nk]) {
          g[nk] = cand;
          parent[nk] = static_cast<std::int64_t>(k);
          open.push({cand + h(nb), nk});
        }
      }
    }
  }
  if (!closed[t]) return std::nullopt;
  GridPath path;
  for (std::int64_t k = static_cast<std::int64_t>(t); k >= 0; k = parent[k]) {
    path.cells.push_back({static_cast<int>(k % grid.nx),
                          static_cast<int>(k / grid.nx)});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const bool diag = path.cells[i].i != path.cells[i - 1].i &&
                      path.cells[i].j != path.cells[i - 1].j;
    (diag ? path.diagonal_moves : path.straight_moves)++;
  }
  return path;
}

std::vector<std::pair<Cell, Cell>> sample_cell_pairs(const OccupancyGrid& grid,
                                                     int n_samples,
                                                     std::uint64_t seed) {
  const auto cells = grid.free_cells();
  std::vector<std::pair<Cell, Cell>> pairs;
  if (cells.empty()) return pairs;
  Rng rng(seed);
  pairs.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    const Cell a = cells[rng.index(cells.size())];
    const Cell b = cells[rng.index(cells.size())];
    pairs.emplace_back(a, b);
  }
  return pairs;
}

double navigation_complexity(const OccupancyGrid& grid, int n_samples,
                             std::uint64_t seed) {
  if (grid.free_count() < 2) {
    throw InvalidArgumentError("navigation complexity needs >= 2 free cells");
  }
  const auto label = connected_components(grid);
  double best = -1;
  for (const auto& [a, b] : sample_cell_pairs(grid, n_samples, seed)) {
    if (a == b || label[grid.index(a)] != label[grid.index(b)]) continue;
    const auto path = astar(grid, a, b);
    if (!path) continue;
    const double l2 = grid.cell * std::hypot(static_cast<double>(a.i - b.i),
                                             static_cast<double>(a.j - b.j));
    best = std::max(best, path->length(grid.cell) / l2);
  }
  if (best < 0) throw UnreachableError("no connected pair among the samples");
  return best;
}

}  // namespace ibrsim::mesh
