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

#include "ibrsim/geometry/equirect.hpp"

#include <numbers>

#include "ibrsim/common/error.hpp"

namespace ibrsim::geom {

using std::numbers::pi;

Vec3 dir_from_coord(double u, double v, int width, int height) {
  const double lon = 2.0 * pi * (u + 0.5) / width - pi;
  const double lat = pi / 2.0 - pi * (v + 0.5) / height;
  const double c = std::cos(lat);
  return {c * std::cos(lon), c * std::sin(lon), std::sin(lat)};
}

Vec3 dir_from_pixel(int u, int v, int width, int height) {
  if (u < 0 || u >= width || v < 0 || v >= height) {
    throw BoundsError("pixel outside equirectangular image");
  }
  return dir_from_coord(u, v, width, height);
}

PixelCoord pixel_from_dir(const Vec3& d, int width, int height) {
  const double n = d.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw InvalidDirectionError("direction must be a non-zero finite vector");
  }
  const double lon = std::atan2(d.y(), d.x());
  const double lat = std::atan2(d.z(), std::hypot(d.x(), d.y()));
  double u = (lon + pi) * width / (2.0 * pi) - 0.5;
  if (u < 0) u += width;
  if (u >= width) u -= width;
  const double v = (pi / 2.0 - lat) * height / pi - 0.5;
  return {u, v};
}

}  // namespace ibrsim::geom
