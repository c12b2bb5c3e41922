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

#include "ibrsim/nn/ops.hpp"

namespace ibrsim::nn {

struct FillerConfig {
  int n_f = 4;
  // Crop height the dilation ladder is sized for; dilations cap at H/2.
  int design_height = 32;
  int in_channels = 3;

  void validate() const;
  friend bool operator==(const FillerConfig&, const FillerConfig&) = default;
};

template <typename T>
struct ConvLayer {
  ConvGeom geom;
  bool batchnorm = true;
  bool activation = true;

  std::vector<T> weight;
  std::vector<T> bias;  // only on layers without batchnorm
  std::vector<T> gamma, beta, running_mean, running_var;
  std::vector<std::uint8_t> frozen;  // one flag per weight

  std::vector<T> d_weight, d_bias, d_gamma, d_beta;

  // Training-mode forward cache.
  Tensor4<T> input;
  Tensor4<T> pre_activation;
  BatchNormCache<T> bn_cache;
  bool has_cache = false;

  std::size_t frozen_count() const;
};

template <typename T>
struct ParamRef {
  T* value;
  T* grad;
  std::size_t size;
  const std::uint8_t* frozen;  // may be null
};

template <typename T>
class FillerNet {
 public:
  static constexpr int kLayerCount = 18;

  explicit FillerNet(const FillerConfig& cfg = {});

  static std::vector<int> dilation_ladder(int design_height);

  const FillerConfig& config() const { return cfg_; }
  std::vector<ConvLayer<T>>& layers() { return layers_; }
  const std::vector<ConvLayer<T>>& layers() const { return layers_; }

  // He-Gaussian N(0, 2/fan_in) weights, zero biases, unit BN scale.
  void init_gaussian(std::uint64_t seed);
  // Freezes floor(n/2) weights per layer chosen uniformly at random.
  void freeze_random_half(std::uint64_t seed);
  void unfreeze();

  // Batch statistics; caches everything backward() needs.
  Tensor4<T> forward_train(const Tensor4<T>& x);
  // Running statistics; no cache.
  Tensor4<T> infer(const Tensor4<T>& x,
                   Execution exec = Execution::kParallel) const;

  // Accumulates parameter gradients and returns d(input). Frozen weights get
  // zero gradient. Throws StateError without a cached forward_train.
  Tensor4<T> backward(const Tensor4<T>& dout);
  void zero_grad();

  // Sets running statistics to exact population statistics of the given
  // inputs, layer by layer in inference mode.
  void recalibrate_batchnorm(const Tensor4<T>& inputs);

  std::vector<ParamRef<T>> params();
  std::size_t param_count() const;

  template <typename U>
  FillerNet<U> cast() const;

 private:
  void check_input(const Tensor4<T>& x) const;

  FillerConfig cfg_;
  std::vector<ConvLayer<T>> layers_;
};

void save_filler(const FillerNet<float>& net, const std::string& path);
FillerNet<float> load_filler(const std::string& path);

}  // namespace ibrsim::nn
