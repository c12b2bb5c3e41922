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
#include <optional>
#include <string_view>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibrsim/env/env.hpp"

namespace ibrsim::metrics {

inline constexpr int kBenchSchemaVersion = 1;

enum class BenchOutput { kRgbdPre, kRgbdPost, kDepth, kNormal, kSemantic, kNonVisual };

const char* bench_output_name(BenchOutput o);
std::optional<BenchOutput> parse_bench_output(std::string_view name);
env::ModalitySet bench_modalities(BenchOutput o);
std::vector<BenchOutput> all_bench_outputs();

struct BenchConfig {
  std::vector<int> resolutions{128, 256, 512};
  std::vector<BenchOutput> outputs = all_bench_outputs();
  // Warmup runs at least `warmup` frames and at least warmup_seconds; the
  // first fraction of a second of a hot loop runs measurably slower.
  int warmup = 10;
  double warmup_seconds = 0.5;
  int frames = 100;
  // Timing runs in `blocks` equal blocks; each continues past its share of
  // `frames` until its share of min_seconds has passed. Blocks of one output
  // alternate across resolutions, and fps is the median block rate.
  int blocks = 9;
  double min_seconds = 0.9;
  std::uint64_t seed = 1;
  env::EnvConfig env;

  void validate() const;
};

struct BenchRow {
  int resolution = 0;
  BenchOutput output = BenchOutput::kNonVisual;
  int frames = 0;     // all timed frames
  double seconds = 0; // total timed wall time
  double fps = 0;     // median block rate
};

struct BenchReport {
  int schema_version = kBenchSchemaVersion;
  int threads = 1;
  int warmup = 0;
  int k = 0;
  double lambda_d = 0;
  int n_f = 0;  // 0 without a filler
  std::vector<BenchRow> rows;

  const BenchRow& row(int resolution, BenchOutput o) const;
};

// One frame is one Env::step (or the reset that starts a new episode), with
// the row's modalities rendered. Rows needing rgb_post require a filler.
BenchReport fps_benchmark(std::shared_ptr<const env::Assets> assets,
                          const BenchConfig& cfg = {});

nlohmann::json bench_to_json(const BenchReport& r);

}  // namespace ibrsim::metrics
