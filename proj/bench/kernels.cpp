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


// Serial reference vs OpenMP path for each parallel kernel. Arg 0 selects
// the execution mode (0 serial, 1 parallel).

#include <benchmark/benchmark.h>

#include "ibrsim/common/rng.hpp"
#include "ibrsim/ibr/pipeline.hpp"
#include "ibrsim/mesh/render.hpp"
#include "ibrsim/nn/filler.hpp"
#include "ibrsim/synth/scene.hpp"

namespace {

using namespace ibrsim;

Execution mode(const benchmark::State& s) {
  return s.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

struct Scene {
  mesh::TriangleMesh mesh;
  mesh::Bvh bvh;
  geom::PanoramaDataset dataset;
  geom::Pose6D target = geom::Pose6D::make(2.3, 0.4, 1.5, 0, 0, 0.7);

  Scene() : mesh(make()), bvh(mesh), dataset(synth::generate_dataset(mesh, bvh, 0.2, 256, 128)) {}

  static mesh::TriangleMesh make() {
    synth::SceneSpec s;
    s.room_width = {6, 6};
    s.room_depth = {5, 5};
    s.clutter_min = s.clutter_max = 3;
    return synth::generate_scene(s);
  }
};

const Scene& scene() {
  static const Scene s;
  return s;
}

void BM_RenderDepth(benchmark::State& state) {
  const Scene& sc = scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mesh::render_equirect(sc.mesh, sc.bvh, sc.target, 256, 128,
                                                   mesh::Modality::kDepth, mode(state)));
  }
}
BENCHMARK(BM_RenderDepth)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Density(benchmark::State& state) {
  const Scene& sc = scene();
  const auto splats = ibr::reproject_view(sc.dataset.views[0], sc.target, 256, 128);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ibr::density_map(splats, 1.0, mode(state)));
  }
}
BENCHMARK(BM_Density)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Interpolate(benchmark::State& state) {
  const Scene& sc = scene();
  const auto splats = ibr::reproject_view(sc.dataset.views[0], sc.target, 256, 128);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ibr::interpolate_view(splats, 256, 128, 3.0, mode(state)));
  }
}
BENCHMARK(BM_Interpolate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RenderView(benchmark::State& state) {
  const Scene& sc = scene();
  ibr::RenderConfig cfg;
  cfg.width = 256;
  cfg.height = 128;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ibr::render_view(sc.dataset, sc.mesh, sc.bvh, sc.target, cfg,
                                              mode(state)));
  }
}
BENCHMARK(BM_RenderView)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Conv(benchmark::State& state) {
  nn::ConvGeom g;
  g.in_c = 16;
  g.out_c = 16;
  g.dilation = 2;
  g.pad = 2;
  Rng rng(1);
  nn::Tensor4<float> x(8, 16, 32, 32);
  for (float& v : x.data) v = static_cast<float>(rng.normal());
  std::vector<float> w(g.weight_count());
  for (float& v : w) v = static_cast<float>(0.1 * rng.normal());
  for (auto _ : state) {
    benchmark::DoNotOptimize(nn::conv_forward(x, w, {}, g, mode(state)));
  }
}
BENCHMARK(BM_Conv)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FillerInfer(benchmark::State& state) {
  nn::FillerNet<float> net;
  net.init_gaussian(1);
  Rng rng(2);
  nn::Tensor4<float> x(1, 3, 128, 128);
  for (float& v : x.data) v = static_cast<float>(rng.uniform());
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.infer(x, mode(state)));
  }
}
BENCHMARK(BM_FillerInfer)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
