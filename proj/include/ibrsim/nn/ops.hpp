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

#include <vector>

#include "ibrsim/common/execution.hpp"
#include "ibrsim/nn/tensor.hpp"

namespace ibrsim::nn {

// Square-kernel convolution geometry. For a transposed convolution the
// weights are laid out [in, out, k, k] and the geometry describes the
// adjoint convolution from output space back to input space.
struct ConvGeom {
  int in_c = 1;
  int out_c = 1;
  int kernel = 3;
  int stride = 1;
  int pad = 1;
  int dilation = 1;
  bool transposed = false;

  int out_size(int in) const;
  std::size_t weight_count() const {
    return static_cast<std::size_t>(in_c) * out_c * kernel * kernel;
  }
  int fan_in() const;
};

template <typename T>
struct ConvGrads {
  Tensor4<T> dx;
  std::vector<T> dw;
  std::vector<T> db;
};

// bias may be empty.
template <typename T>
Tensor4<T> conv_forward(const Tensor4<T>& x, const std::vector<T>& w,
                        const std::vector<T>& bias, const ConvGeom& g,
                        Execution exec = Execution::kParallel);

// dw/db are sized from w/bias; db stays empty without a bias.
template <typename T>
ConvGrads<T> conv_backward(const Tensor4<T>& x, const std::vector<T>& w,
                           bool has_bias, const Tensor4<T>& dout,
                           const ConvGeom& g,
                           Execution exec = Execution::kParallel);

// Direct nested-loop convolution, used as the reference for the GEMM path.
template <typename T>
Tensor4<T> conv_forward_reference(const Tensor4<T>& x, const std::vector<T>& w,
                                  const std::vector<T>& bias,
                                  const ConvGeom& g);

template <typename T>
struct BatchNormCache {
  Tensor4<T> xhat;
  std::vector<double> inv_std;
};

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.1;

// Training mode: per-channel statistics over N, H, W (biased variance).
template <typename T>
Tensor4<T> batchnorm_forward_train(const Tensor4<T>& x,
                                   const std::vector<T>& gamma,
                                   const std::vector<T>& beta,
                                   BatchNormCache<T>& cache,
                                   std::vector<double>* batch_mean = nullptr,
                                   std::vector<double>* batch_var = nullptr);

template <typename T>
Tensor4<T> batchnorm_forward_infer(const Tensor4<T>& x,
                                   const std::vector<T>& gamma,
                                   const std::vector<T>& beta,
                                   const std::vector<T>& running_mean,
                                   const std::vector<T>& running_var);

template <typename T>
Tensor4<T> batchnorm_backward(const Tensor4<T>& dout,
                              const std::vector<T>& gamma,
                              const BatchNormCache<T>& cache,
                              std::vector<T>& dgamma, std::vector<T>& dbeta);

inline constexpr double kLeakySlope = 0.1;

template <typename T>
Tensor4<T> leaky_relu(const Tensor4<T>& x);

// Gradient given the activation input.
template <typename T>
Tensor4<T> leaky_relu_backward(const Tensor4<T>& x, const Tensor4<T>& dout);

}  // namespace ibrsim::nn
