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
#include <functional>
#include <vector>

#include "ibrsim/common/image.hpp"
#include "ibrsim/nn/loss.hpp"

namespace ibrsim::nn {

// Invalid pixels become zeros.
Tensor4<float> images_to_tensor(const std::vector<Image>& images);
Tensor4<float> image_to_tensor(const Image& image);
Image tensor_to_image(const Tensor4<float>& t, int index = 0);

// Runs the net in inference mode on a whole image; height and width must be
// multiples of 4.
Image apply_net(const FillerNet<float>& net, const Image& image);

struct InitConfig {
  double target_residual = 0.01;
  int max_steps = 4000;
  int batch = 8;
  double lr = 1e-3;
  int check_every = 100;
  std::function<void(int step, double residual)> on_check;
};

struct InitReport {
  double residual = 0;  // |f(x) - x|_1 / |x|_1, inference mode
  int steps = 0;
};

double identity_residual(const FillerNet<float>& net,
                         const Tensor4<float>& samples);

// Gaussian init, freezes a random half of every layer, then trains the rest
// for f(x) = x under L1. Throws InitFailureError when the budget runs out.
InitReport stochastic_identity_init(FillerNet<float>& net, std::uint64_t seed,
                                    const Tensor4<float>& samples,
                                    const InitConfig& cfg = {});

struct ImagePair {
  Image source;  // I_s
  Image target;  // I_t
};

struct TrainConfig {
  int epochs = 50;
  double lr = 2e-4;
  int batch = 8;
  int crop = 32;
  std::uint64_t seed = 7;
  LossConfig<float> loss;
};

struct TrainHistory {
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

// Minimizes mean D(f(I_s), I_t) over random crops.
TrainHistory train_filler(FillerNet<float>& f,
                          const std::vector<ImagePair>& pairs,
                          const TrainConfig& cfg);

// Minimizes E[D(f(I_s), I_t)] + E[D(f(I_s), u(I_t))].
TrainHistory train_joint(FillerNet<float>& f, FillerNet<float>& u,
                         const std::vector<ImagePair>& pairs,
                         const TrainConfig& cfg);

}  // namespace ibrsim::nn
