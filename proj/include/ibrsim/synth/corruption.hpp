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

#include <array>
#include <cstdint>
#include <string>

#include "ibrsim/common/image.hpp"

namespace ibrsim::synth {

struct CorruptionSpec {
  std::array<float, 3> gain{1, 1, 1};
  std::array<float, 3> shift{0, 0, 0};
  double noise_sigma = 0;
  double vignette = 0;  // brightness loss at the image corners
  std::uint64_t seed = 0;

  bool is_identity() const;
  void validate() const;
  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

CorruptionSpec corruption_from_json(const std::string& text);
std::string corruption_to_json(const CorruptionSpec& spec);

// y = clamp((gain * x + shift) * (1 - vignette * r^2) + sigma * n, 0, 1) with
// r^2 normalized to 1 at the corners and n standard normal drawn from the
// (seed, stream) pair. The mask is copied.
Image make_domain_pair(const Image& rgb, const CorruptionSpec& spec,
                       std::uint64_t stream = 0);

}  // namespace ibrsim::synth
