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
#include <optional>
#include <utility>
#include <vector>

#include "ibrsim/mesh/bvh.hpp"
#include "ibrsim/mesh/collision.hpp"

namespace ibrsim::mesh {

struct Cell {
  int i = 0;  // x index
  int j = 0;  // y index
  friend bool operator==(const Cell&, const Cell&) = default;
};

// 2-D traversability grid over the mesh footprint. Cell (i, j) is centered at
// origin + ((i + 0.5) * cell, (j + 0.5) * cell).
struct OccupancyGrid {
  double cell = 0.1;
  double origin_x = 0, origin_y = 0;
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> traversable;  // row-major in j
  std::vector<std::uint8_t> has_floor;    // floor inside the band
  std::vector<float> floor_z;             // valid where has_floor

  bool in_bounds(Cell c) const {
    return c.i >= 0 && c.j >= 0 && c.i < nx && c.j < ny;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.j) * nx + c.i;
  }
  bool free(Cell c) const { return in_bounds(c) && traversable[index(c)]; }
  Vec3 center(Cell c) const;  // z = floor height (0 without floor)
  Cell cell_of(double x, double y) const;
  std::vector<Cell> free_cells() const;
  std::size_t free_count() const;
  double floor_area() const;
};

struct FloorBand {
  double z_min = -0.1;
  double z_max = 0.5;
};

// Probe clearance above the band for the downward floor ray.
inline constexpr double kFloorProbeClearance = 0.05;

// Height of the first upward-facing surface below (x, y, band.z_max +
// clearance), if it lies inside the band.
std::optional<double> floor_height(const Bvh& bvh, const TriangleMesh& mesh,
                                   double x, double y, const FloorBand& band);

OccupancyGrid occupancy_grid(const TriangleMesh& mesh, const Bvh& bvh,
                             double cell, const FloorBand& band = {},
                             const AgentBody& body = {});

// 4-connected component label per cell (-1 for blocked cells).
std::vector<int> connected_components(const OccupancyGrid& grid,
                                      int* component_count = nullptr);

// Shortest 8-connected path (diagonal cost sqrt 2, no corner cutting) found
// with A* and a Euclidean heuristic.
struct GridPath {
  std::vector<Cell> cells;
  int straight_moves = 0;
  int diagonal_moves = 0;
  double length(double cell) const;  // meters
};
std::optional<GridPath> astar(const OccupancyGrid& grid, Cell start,
                              Cell goal);

// Pairs of free cells drawn uniformly (with replacement) from `seed`.
std::vector<std::pair<Cell, Cell>> sample_cell_pairs(const OccupancyGrid& grid,
                                                     int n_samples,
                                                     std::uint64_t seed);

// max over sampled connected pairs of A* length / straight-line distance.
// Disconnected or coincident pairs are skipped. Throws UnreachableError when
// no usable pair was drawn, InvalidArgumentError with < 2 free cells.
double navigation_complexity(const OccupancyGrid& grid, int n_samples,
                             std::uint64_t seed);

}  // namespace ibrsim::mesh
