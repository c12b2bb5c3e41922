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

#include <cstddef>
#include <vector>

#include "ibrsim/common/execution.hpp"
#include "ibrsim/common/image.hpp"
#include "ibrsim/geometry/dataset.hpp"
#include "ibrsim/mesh/bvh.hpp"

namespace ibrsim::ibr {

struct RenderConfig {
  int k = 4;
  double lambda_d = 1.0;
  double depth_eps = 0.1;     // meters
  double kde_bandwidth = 1.0; // pixels
  double r_max = 3.0;         // interpolation search radius, pixels
  int width = 128;
  int height = 64;

  void validate() const;
};

// Continuous target coordinates: pixel (i, j) has its center at (i, j).
// u is wrapped into [0, W); v lies in [-0.5, H - 0.5].
struct Splat {
  double u = 0;
  double v = 0;
  float depth = 0;
  Eigen::Vector3f rgb = Eigen::Vector3f::Zero();
};

struct SplatSet {
  int view_id = 0;
  int width = 0;
  int height = 0;
  std::vector<Splat> splats;

  std::size_t size() const { return splats.size(); }
};

// KDE truncation radius in bandwidths.
inline constexpr double kKdeCutoff = 4.0;

std::vector<int> select_source_views(const geom::PanoramaDataset& dataset,
                                     const geom::Pose6D& target, int k);

SplatSet reproject_view(const geom::PanoramaView& source,
                        const geom::Pose6D& target, int width, int height);

SplatSet depth_filter(const SplatSet& splats, const Image& target_depth,
                      double depth_eps);

// Splats-per-pixel field; 1 channel.
Image density_map(const SplatSet& splats, double bandwidth,
                  Execution exec = Execution::kParallel);

// Per-pixel softmax over views. When masks are given, views invalid at a
// pixel get zero weight and the softmax runs over the valid ones; pixels with
// no valid view get uniform weights.
std::vector<Image> view_weights(const std::vector<Image>& densities,
                                double lambda_d,
                                const std::vector<const Image*>& masks = {});

Image interpolate_view(const SplatSet& splats, int width, int height,
                       double r_max = 3.0,
                       Execution exec = Execution::kParallel);

// Result mask marks pixels covered by at least one view; its complement is
// the dis-occlusion mask.
Image aggregate(const std::vector<Image>& images,
                const std::vector<Image>& weights);

struct RenderOutput {
  Image image;
  std::vector<int> views;
  std::size_t splats_total = 0;
  std::size_t splats_kept = 0;

  double disocclusion_fraction() const;
};

RenderOutput render_view(const geom::PanoramaDataset& dataset,
                         const mesh::TriangleMesh& mesh, const mesh::Bvh& bvh,
                         const geom::Pose6D& target, const RenderConfig& cfg,
                         Execution exec = Execution::kParallel);

// Same pipeline with the target depth supplied by the caller.
RenderOutput render_view(const geom::PanoramaDataset& dataset,
                         const Image& target_depth, const geom::Pose6D& target,
                         const RenderConfig& cfg,
                         Execution exec = Execution::kParallel);

}  // namespace ibrsim::ibr
