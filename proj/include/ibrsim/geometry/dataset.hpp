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

#include <string>
#include <vector>

#include "ibrsim/common/image.hpp"
#include "ibrsim/geometry/pose.hpp"

namespace ibrsim::geom {

// One RGB-D equirectangular capture with its global pose.
struct PanoramaView {
  int id = 0;
  Pose6D pose;
  Image rgb;    // 3 channels in [0,1]
  Image depth;  // 1 channel, meters along the ray; mask marks valid pixels
};

// Sparse set of panoramas. On disk:
//   poses.json     [{id, x, y, z, roll, pitch, yaw, width, height}, ...]
//   rgb_<id>.ppm   binary P6, 8-bit
//   depth_<id>.bin little-endian float32, row-major, meters
struct PanoramaDataset {
  std::vector<PanoramaView> views;

  bool empty() const { return views.empty(); }
  const PanoramaView& by_id(int id) const;

  void save(const std::string& dir) const;
  static PanoramaDataset load(const std::string& dir);
};

}  // namespace ibrsim::geom
