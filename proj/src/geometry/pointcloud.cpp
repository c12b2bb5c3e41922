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

#include "ibrsim/geometry/pointcloud.hpp"

#include "ibrsim/common/error.hpp"
#include "ibrsim/geometry/equirect.hpp"

namespace ibrsim::geom {

PointCloud panorama_to_pointcloud(const Image& rgb, const Image& depth,
                                  const Pose6D& pose, std::int32_t view_id) {
  if (rgb.width() != depth.width() || rgb.height() != depth.height() ||
      rgb.channels() != 3 || depth.channels() != 1) {
    throw ShapeError("rgb and depth panoramas must share dimensions");
  }
  const RigidTransform cam_to_world = pose_to_transform(pose);
  PointCloud cloud;
  const int w = depth.width(), h = depth.height();
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!depth.valid(u, v)) continue;
      const Vec3 local = depth.at(u, v) * dir_from_coord(u, v, w, h);
      cloud.positions.push_back(cam_to_world.apply(local));
      cloud.colors.emplace_back(rgb.at(u, v, 0), rgb.at(u, v, 1),
                                rgb.at(u, v, 2));
      cloud.view_ids.push_back(view_id);
    }
  }
  return cloud;
}

}  // namespace ibrsim::geom
