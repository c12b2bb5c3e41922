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


#include "ibrsim/synth/corruption.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ibrsim/common/rng.hpp"

namespace ibrsim::synth {

using nlohmann::json;

bool CorruptionSpec::is_identity() const {
  return gain == std::array<float, 3>{1, 1, 1} &&
         shift == std::array<float, 3>{0, 0, 0} && noise_sigma == 0 &&
         vignette == 0;
}

void CorruptionSpec::validate() const {
  for (int c = 0; c < 3; ++c) {
    if (!std::isfinite(gain[c]) || !std::isfinite(shift[c])) {
      throw InvalidArgumentError("corruption gain and shift must be finite");
    }
  }
  if (!(noise_sigma >= 0) || !std::isfinite(noise_sigma)) {
    throw InvalidArgumentError("noise_sigma must be >= 0");
  }
  if (!(vignette >= 0 && vignette <= 1)) {
    throw InvalidArgumentError("vignette must lie in [0, 1]");
  }
}

CorruptionSpec corruption_from_json(const std::string& text) {
  CorruptionSpec s;
  try {
    const json j = json::parse(text);
    if (j.contains("gain")) s.gain = j.at("gain").get<std::array<float, 3>>();
    if (j.contains("shift")) s.shift = j.at("shift").get<std::array<float, 3>>();
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.vignette = j.value("vignette", s.vignette);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw FormatError(std::string("corruption spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string corruption_to_json(const CorruptionSpec& s) {
  const json j = {{"gain", s.gain},
                  {"shift", s.shift},
                  {"noise_sigma", s.noise_sigma},
                  {"vignette", s.vignette},
                  {"seed", s.seed}};
  return j.dump(2);
}

Image make_domain_pair(const Image& rgb, const CorruptionSpec& spec,
                       std::uint64_t stream) {
  spec.validate();
  if (rgb.channels() != 3) throw ShapeError("corruption expects RGB");
  Image out = rgb;
  if (spec.is_identity()) return out;
  Rng rng(mix_seed(spec.seed, stream));
  const double cx = (rgb.width() - 1) / 2.0, cy = (rgb.height() - 1) / 2.0;
  for (int v = 0; v < rgb.height(); ++v) {
    for (int u = 0; u < rgb.width(); ++u) {
      const double dx = cx > 0 ? (u - cx) / cx : 0.0;
      const double dy = cy > 0 ? (v - cy) / cy : 0.0;
      const double fall = 1.0 - spec.vignette * (dx * dx + dy * dy) / 2.0;
      for (int c = 0; c < 3; ++c) {
        double y = (spec.gain[c] * rgb.at(u, v, c) + spec.shift[c]) * fall;
        if (spec.noise_sigma > 0) y += spec.noise_sigma * rng.normal();
        out.at(u, v, c) = static_cast<float>(std::clamp(y, 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace ibrsim::synth
