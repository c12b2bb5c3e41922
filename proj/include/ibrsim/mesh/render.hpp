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

#include "ibrsim/common/execution.hpp"
#include "ibrsim/common/image.hpp"
#include "ibrsim/mesh/bvh.hpp"

namespace ibrsim::mesh {

enum class Modality { kDepth, kNormal, kSemantic, kAlbedo };

// Ray-traced equirectangular rendering from `pose`.
//   depth:    1 channel, hit distance along the ray (meters)
//   normal:   3 channels, world-frame normal facing the camera, (n + 1) / 2
//   semantic: 1 channel, face semantic id
//   albedo:   3 channels, face albedo modulated by its checker
// Rays that miss leave the pixel invalid.
Image render_equirect(const TriangleMesh& mesh, const Bvh& bvh,
                      const geom::Pose6D& pose, int width, int height,
                      Modality modality,
                      Execution exec = Execution::kParallel);

// Forward beam length from `origin` along `dir`; `max_range` when nothing is
// hit closer.
double beam_length(const Bvh& bvh, const Vec3& origin, const Vec3& dir,
                   double max_range);

}  // namespace ibrsim::mesh
