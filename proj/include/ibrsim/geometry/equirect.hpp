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

#include <cmath>

#include "ibrsim/geometry/pose.hpp"

namespace ibrsim::geom {

// Continuous equirectangular coordinates. Pixel (i, j) has its center at
// (i, j); the longitude seam sits at u = -0.5 == W - 0.5.
struct PixelCoord {
  double u = 0;
  double v = 0;
};

// Unit direction in the camera frame for a (possibly fractional) pixel
// coordinate. Longitude = 2*pi*(u+0.5)/W - pi, latitude = pi/2 - pi*(v+0.5)/H.
Vec3 dir_from_coord(double u, double v, int width, int height);

// Integer-pixel variant; throws BoundsError outside [0,W) x [0,H).
Vec3 dir_from_pixel(int u, int v, int width, int height);

// Inverse of dir_from_coord. u is wrapped into [0, W); v is in
// [-0.5, H - 0.5]. Throws InvalidDirectionError for a (near) zero vector.
PixelCoord pixel_from_dir(const Vec3& d, int width, int height);

// Nearest integer pixel for a continuous coordinate: u wraps around the seam,
// v clamps at the poles.
inline int wrap_pixel_u(double u, int width) {
  int i = static_cast<int>(std::floor(u + 0.5));
  i %= width;
  return i < 0 ? i + width : i;
}
inline int clamp_pixel_v(double v, int height) {
  const int j = static_cast<int>(std::floor(v + 0.5));
  return j < 0 ? 0 : (j >= height ? height - 1 : j);
}

}  // namespace ibrsim::geom
