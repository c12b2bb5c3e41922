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

#include "ibrsim/mesh/render.hpp"

#include "ibrsim/geometry/equirect.hpp"

namespace ibrsim::mesh {

namespace {

int channels_of(Modality m) {
  return (m == Modality::kNormal || m == Modality::kAlbedo) ? 3 : 1;
}

void render_row(const TriangleMesh& mesh, const Bvh& bvh,
                const geom::RigidTransform& cam, int v, Modality modality,
                Image& out) {
  const int w = out.width(), h = out.height();
  const Vec3 origin = cam.translation();
  for (int u = 0; u < w; ++u) {
    const Vec3 dir = cam.apply_rotation(geom::dir_from_coord(u, v, w, h));
    const auto hit = bvh.raycast(origin, dir);
    if (!hit) {
      out.set_valid(u, v, false);
      continue;
    }
    out.set_valid(u, v, true);
    switch (modality) {
      case Modality::kDepth:
        out.at(u, v) = static_cast<float>(hit->t);
        break;
      case Modality::kSemantic:
        out.at(u, v) = static_cast<float>(mesh.materials[hit->face].semantic);
        break;
      case Modality::kNormal: {
        Vec3 n = mesh.face_normal(hit->face);
        if (n.dot(dir) > 0) n = -n;
        for (int c = 0; c < 3; ++c) {
          out.at(u, v, c) = static_cast<float>(0.5 * (n[c] + 1.0));
        }
        break;
      }
      case Modality::kAlbedo: {
        const Color col = mesh.shade(hit->face, origin + hit->t * dir);
        for (int c = 0; c < 3; ++c) out.at(u, v, c) = col[c];
        break;
      }
    }
  }
}

}  // namespace

Image render_equirect(const TriangleMesh& mesh, const Bvh& bvh,
                      const geom::Pose6D& pose, int width, int height,
                      Modality modality, Execution exec) {
  Image out(width, height, channels_of(modality), 0.0f, false);
  const geom::RigidTransform cam = geom::pose_to_transform(pose);
  if (exec == Execution::kSerial) {
    for (int v = 0; v < height; ++v) render_row(mesh, bvh, cam, v, modality, out);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (int v = 0; v < height; ++v) render_row(mesh, bvh, cam, v, modality, out);
  }
  return out;
}

double beam_length(const Bvh& bvh, const Vec3& origin, const Vec3& dir,
                   double max_range) {
  const auto hit = bvh.raycast(origin, dir.normalized(), max_range);
  return hit ? hit->t : max_range;
}

}  // namespace ibrsim::mesh
