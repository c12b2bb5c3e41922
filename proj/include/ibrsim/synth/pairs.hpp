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

#include "ibrsim/ibr/pipeline.hpp"
#include "ibrsim/nn/train.hpp"
#include "ibrsim/synth/corruption.hpp"
#include "ibrsim/synth/scene.hpp"

namespace ibrsim::synth {

// Uniform draws over the largest traversable component, with replacement.
std::vector<geom::Pose6D> random_free_poses(const mesh::TriangleMesh& mesh,
                                            const mesh::Bvh& bvh, int count,
                                            const PoseSampling& cfg = {});

struct PairSpec {
  int count = 200;
  int crop = 32;
  int crops_per_pose = 4;
  int row_margin = 8;  // keeps crops away from the poles
  std::uint64_t seed = 11;
  ibr::RenderConfig render;
  CorruptionSpec corruption;
};

struct PairRecord {
  geom::Pose6D pose;
  int u0 = 0, v0 = 0;
  double hole_fraction = 0;  // share of source pixels with no splat
};

struct PairSet {
  std::vector<nn::ImagePair> pairs;
  std::vector<PairRecord> records;
  std::vector<Image> clean;  // uncorrupted oracle crops
};

// I_s is the IBR render at a random novel pose with holes set to black; I_t
// is the corrupted oracle render of the same crop.
PairSet generate_pairs(const mesh::TriangleMesh& mesh, const mesh::Bvh& bvh,
                       const geom::PanoramaDataset& dataset,
                       const PairSpec& spec);

Image crop(const Image& img, int u0, int v0, int w, int h);

void save_pairs(const std::string& dir, const PairSet& set);
PairSet load_pairs(const std::string& dir);

}  // namespace ibrsim::synth
