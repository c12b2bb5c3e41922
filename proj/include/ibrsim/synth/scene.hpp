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
#include <string>
#include <vector>

#include "ibrsim/geometry/dataset.hpp"
#include "ibrsim/mesh/navigation.hpp"

namespace ibrsim::synth {

struct Range {
  double lo = 0, hi = 0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct StairSpec {
  int steps = 0;  // 0 disables the stairway
  double rise = 0.17;
  double run = 0.28;
  double width = 1.0;
  friend bool operator==(const StairSpec&, const StairSpec&) = default;
};

struct SceneSpec {
  std::uint64_t seed = 1;
  int room_count_min = 1, room_count_max = 1;
  Range room_width{4, 4};  // along x, the chain axis
  Range room_depth{4, 4};  // along y
  double room_height = 3.0;
  double corridor_width = 1.0;
  Range corridor_length{1.0, 2.0};
  double door_height = 2.1;
  StairSpec stairs;
  Range checker_scale{0.25, 0.6};
  int clutter_min = 0, clutter_max = 0;  // boxes per room
  Range clutter_size{0.4, 1.0};
  Range clutter_height{0.3, 1.2};

  // Throws InvalidArgumentError on non-positive or inverted dimensions.
  void validate() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

SceneSpec scene_spec_from_json(const std::string& text);
std::string scene_spec_to_json(const SceneSpec& spec);

inline constexpr int kLayoutRetries = 64;
inline constexpr int kClutterRetries = 200;
// Clearance kept between clutter, walls, stairs and door approaches so that
// every room stays connected for an agent of radius 0.2 m.
inline constexpr double kClutterClearance = 0.6;

// Rooms are chained along +x and joined by corridors ending in door openings.
// The stairway, if any, rises along +x against the -y wall of the last room.
// Throws GenerationError when no layout fits after bounded retries.
mesh::TriangleMesh generate_scene(const SceneSpec& spec);

struct PoseSampling {
  double camera_height = 1.6;
  double agent_radius = 0.2;
  double cell = 0.1;
  std::uint64_t seed = 1;
};

struct FreeSpace {
  mesh::OccupancyGrid grid;
  std::vector<mesh::Cell> cells;  // largest traversable component, row order
  double area() const { return cells.size() * grid.cell * grid.cell; }
};

// Throws GenerationError when there is no traversable space.
FreeSpace free_space(const mesh::TriangleMesh& mesh, const mesh::Bvh& bvh,
                     const PoseSampling& cfg);

// Spreads round(area * density) camera poses over the largest traversable
// component by farthest-point selection; selection stops early once the gap
// would drop below two agent radii. Yaw is random, roll and pitch zero.
std::vector<geom::Pose6D> sample_panorama_poses(const mesh::TriangleMesh& mesh,
                                                const mesh::Bvh& bvh,
                                                double density,
                                                const PoseSampling& cfg = {});

// RGB is the shaded albedo quantized to 8 bits so that PPM storage is exact.
geom::PanoramaView render_oracle_panorama(const mesh::TriangleMesh& mesh,
                                          const mesh::Bvh& bvh,
                                          const geom::Pose6D& pose, int width,
                                          int height, int id = 0);

geom::PanoramaDataset generate_dataset(const mesh::TriangleMesh& mesh,
                                       const mesh::Bvh& bvh, double density,
                                       int width, int height,
                                       const PoseSampling& cfg = {});

}  // namespace ibrsim::synth
