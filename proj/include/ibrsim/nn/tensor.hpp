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

#include "ibrsim/common/error.hpp"

namespace ibrsim::nn {

// NCHW, row-major.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_) {
    if (n_ <= 0 || c_ <= 0 || h_ <= 0 || w_ <= 0) {
      throw ShapeError("tensor dims must be positive");
    }
    data.assign(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill);
  }

  std::size_t size() const { return data.size(); }
  std::size_t sample_size() const {
    return static_cast<std::size_t>(c) * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  T* sample(int i) { return data.data() + i * sample_size(); }
  const T* sample(int i) const { return data.data() + i * sample_size(); }

  T& at(int i, int ch, int y, int x) {
    return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
  }
  T at(int i, int ch, int y, int x) const {
    return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
  }

  template <typename U>
  Tensor4<U> cast() const {
    Tensor4<U> out;
    out.n = n, out.c = c, out.h = h, out.w = w;
    out.data.assign(data.begin(), data.end());
    return out;
  }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;
};

}  // namespace ibrsim::nn
