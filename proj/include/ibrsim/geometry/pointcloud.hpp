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
#include <vector>

#include "ibrsim/common/image.hpp"
#include "ibrsim/geometry/pose.hpp"

namespace ibrsim::geom {

struct PointCloud {
  std::vector<Vec3> positions;  // world frame, meters
  std::vector<Eigen::Vector3f> colors;
  std::vector<std::int32_t> view_ids;

  std::size_t size() const { return positions.size(); }
};

// One world-space point per valid pixel of `depth`. Depth is the Euclidean
// distance along the pixel ray. Throws ShapeError on size mismatch.
PointCloud panorama_to_pointcloud(const Image& rgb, const Image& depth,
                                  const Pose6D& pose, std::int32_t view_id = 0);

}  // namespace ibrsim::geom
