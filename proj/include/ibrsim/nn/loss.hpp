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

#include <memory>
#include <vector>

#include "ibrsim/nn/filler.hpp"

namespace ibrsim::nn {

template <typename T>
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<Tensor4<T>> features(const Tensor4<T>& x) const = 0;
  // Pulls per-level gradients back to the input.
  virtual Tensor4<T> backward(const Tensor4<T>& x,
                              const std::vector<Tensor4<T>>& grads) const = 0;
};

// The image plus 2x, 4x, 8x average-pooled copies. A trailing partial window
// averages over the pixels it covers.
template <typename T>
class PixelPyramid : public FeatureExtractor<T> {
 public:
  explicit PixelPyramid(int levels = 4);
  std::vector<Tensor4<T>> features(const Tensor4<T>& x) const override;
  Tensor4<T> backward(const Tensor4<T>& x,
                      const std::vector<Tensor4<T>>& grads) const override;
  int levels() const { return levels_; }

 private:
  int levels_;
};

template <typename T>
struct LossConfig {
  std::shared_ptr<const FeatureExtractor<T>> extractor =
      std::make_shared<PixelPyramid<T>>();
  double gamma = 0.05;
  int tile = 32;
  // |x| below this knee is replaced by x^2/smooth.
  double smooth = 1e-8;

  void validate() const;
};

template <typename T>
struct LossResult {
  double value = 0;   // mean over the batch of D(I1, I2)
  Tensor4<T> grad;    // d value / d I1
};

// D(I1, I2) = sum_l (1/n_l) |psi_l(I1) - psi_l(I2)|_1
//           + gamma * sum_tiles |mean(I1 tile) - mean(I2 tile)|_1
template <typename T>
LossResult<T> perceptual_color_loss(const Tensor4<T>& i1, const Tensor4<T>& i2,
                                    const LossConfig<T>& cfg,
                                    bool want_grad = true);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m, v;
};

// Frozen entries are skipped entirely.
template <typename T>
void adam_step(const std::vector<ParamRef<T>>& params, AdamState& state,
               double lr);

}  // namespace ibrsim::nn
