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


#include "ibrsim/metrics/bench.hpp"

#include <algorithm>
#include <chrono>
#include <memory>

#include <omp.h>

#include "ibrsim/common/error.hpp"
#include "ibrsim/common/rng.hpp"

namespace ibrsim::metrics {

const char* bench_output_name(BenchOutput o) {
  switch (o) {
    case BenchOutput::kRgbdPre: return "rgbd_pre";
    case BenchOutput::kRgbdPost: return "rgbd_post";
    case BenchOutput::kDepth: return "depth";
    case BenchOutput::kNormal: return "normal";
    case BenchOutput::kSemantic: return "semantic";
    case BenchOutput::kNonVisual: return "non_visual";
  }
  return "?";
}

std::optional<BenchOutput> parse_bench_output(std::string_view name) {
  for (BenchOutput o : all_bench_outputs()) {
    if (name == bench_output_name(o)) return o;
  }
  return std::nullopt;
}

env::ModalitySet bench_modalities(BenchOutput o) {
  using env::Modality;
  switch (o) {
    case BenchOutput::kRgbdPre: return {Modality::kRgbPre, Modality::kDepth};
    case BenchOutput::kRgbdPost: return {Modality::kRgbPost, Modality::kDepth};
    case BenchOutput::kDepth: return {Modality::kDepth};
    case BenchOutput::kNormal: return {Modality::kNormal};
    case BenchOutput::kSemantic: return {Modality::kSemantic};
    case BenchOutput::kNonVisual: return {};
  }
  return {};
}

std::vector<BenchOutput> all_bench_outputs() {
  return {BenchOutput::kRgbdPre, BenchOutput::kRgbdPost, BenchOutput::kDepth,
          BenchOutput::kNormal,  BenchOutput::kSemantic, BenchOutput::kNonVisual};
}

void BenchConfig::validate() const {
  if (resolutions.empty() || outputs.empty()) {
    throw InvalidArgumentError("bench: empty grid");
  }
  if (warmup < 0 || !(warmup_seconds >= 0) || frames < 1 || !(min_seconds >= 0) ||
      blocks < 1) {
    throw InvalidArgumentError("bench: bad frame counts");
  }
}

const BenchRow& BenchReport::row(int resolution, BenchOutput o) const {
  for (const BenchRow& r : rows) {
    if (r.resolution == resolution && r.output == o) return r;
  }
  throw InvalidArgumentError("bench: no such row");
}

namespace {

using Clock = std::chrono::steady_clock;

// One output at one resolution, driven block by block.
class RowRunner {
 public:
  RowRunner(const std::shared_ptr<const env::Assets>& assets, const BenchConfig& cfg,
            int res, BenchOutput out)
      : cfg_(cfg), env_(assets, with_resolution(cfg.env, res)),
        rng_(mix_seed(cfg.seed, 1000)) {
    env_.set_modalities(bench_modalities(out));
    task_.kind = env::TaskKind::kDistantNavigation;
    task_.seed = cfg.seed;
    task_.max_steps = 1 << 30;
    env_.reset(task_, mix_seed(cfg.seed, episode_++));
    row_.resolution = res;
    row_.output = out;
  }

  void warmup() {
    const auto w0 = Clock::now();
    for (int i = 0; i < cfg_.warmup || seconds(w0) < cfg_.warmup_seconds; ++i) frame();
  }

  void block() {
    const int per_block = (cfg_.frames + cfg_.blocks - 1) / cfg_.blocks;
    const double block_seconds = cfg_.min_seconds / cfg_.blocks;
    const auto t0 = Clock::now();
    int n = 0;
    double elapsed = 0;
    while (n < per_block || elapsed < block_seconds) {
      frame();
      ++n;
      elapsed = seconds(t0);
    }
    row_.frames += n;
    row_.seconds += elapsed;
    rates_.push_back(n / elapsed);
  }

  BenchRow finish() {
    std::sort(rates_.begin(), rates_.end());
    row_.fps = rates_[rates_.size() / 2];
    return row_;
  }

 private:
  static env::EnvConfig with_resolution(env::EnvConfig ec, int res) {
    ec.resolution = res;
    return ec;
  }
  static double seconds(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }

  // Same walk at every resolution and output.
  void frame() {
    if (env_.done()) {
      env_.reset(task_, mix_seed(cfg_.seed, episode_++));
      return;
    }
    // Mostly forward so the walk covers the room.
    const int r = rng_.uniform_int(0, 5);
    env_.step(r < 3 ? env::Action::kForward : static_cast<env::Action>(r - 2));
  }

  const BenchConfig& cfg_;
  env::Env env_;
  env::TaskSpec task_;
  Rng rng_;
  std::uint64_t episode_ = 0;
  BenchRow row_;
  std::vector<double> rates_;
};

}  // namespace

BenchReport fps_benchmark(std::shared_ptr<const env::Assets> assets,
                          const BenchConfig& cfg) {
  cfg.validate();
  BenchReport rep;
  rep.threads = omp_get_max_threads();
  rep.warmup = cfg.warmup;
  rep.k = cfg.env.render.k;
  rep.lambda_d = cfg.env.render.lambda_d;
  rep.n_f = assets->filler ? assets->filler->config().n_f : 0;
  // Blocks of one output alternate across resolutions so that slow drift in
  // machine speed lands on every resolution alike; the median over blocks
  // then drops the short stalls.
  const std::size_t nr = cfg.resolutions.size(), no = cfg.outputs.size();
  rep.rows.resize(nr * no);
  for (std::size_t o = 0; o < no; ++o) {
    std::vector<std::unique_ptr<RowRunner>> runners;
    for (int res : cfg.resolutions) {
      runners.push_back(std::make_unique<RowRunner>(assets, cfg, res, cfg.outputs[o]));
      runners.back()->warmup();
    }
    for (int b = 0; b < cfg.blocks; ++b) {
      for (auto& r : runners) r->block();
    }
    for (std::size_t i = 0; i < nr; ++i) rep.rows[i * no + o] = runners[i]->finish();
  }
  return rep;
}

nlohmann::json bench_to_json(const BenchReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const BenchRow& row : r.rows) {
    rows.push_back({{"resolution", row.resolution},
                    {"output", bench_output_name(row.output)},
                    {"fps", row.fps},
                    {"frames", row.frames},
                    {"seconds", row.seconds},
                    {"k", r.k},
                    {"lambda_d", r.lambda_d},
                    {"n_f", r.n_f}});
  }
  return {{"schema_version", r.schema_version},
          {"threads", r.threads},
          {"warmup", r.warmup},
          {"config", {{"k", r.k}, {"lambda_d", r.lambda_d}, {"n_f", r.n_f}}},
          {"rows", rows}};
}

}  // namespace ibrsim::metrics
