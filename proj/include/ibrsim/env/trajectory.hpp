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

#include "ibrsim/env/env.hpp"

namespace ibrsim::env {

inline constexpr int kTrajectoryVersion = 1;

struct TrajectoryStep {
  Action action = Action::kForward;
  double reward = 0;
  bool done = false;
  int collisions = 0;
  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct Trajectory {
  TaskSpec task;
  std::uint64_t seed = 0;
  std::vector<TrajectoryStep> steps;
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Resets `env` and runs `actions`, stopping early once the episode is done.
Trajectory record(Env& env, const TaskSpec& task, std::uint64_t seed,
                  const std::vector<Action>& actions,
                  std::vector<StepResult>* results = nullptr);

// Re-runs a recorded episode. An empty trajectory plays back nothing and
// leaves the environment untouched.
std::vector<StepResult> replay(Env& env, const Trajectory& t);

// Rewards compared bitwise, together with done flags and collision counts.
bool replay_matches(const Trajectory& t, const std::vector<StepResult>& r);

std::string trajectory_to_json(const Trajectory& t);
// Throws FormatError on malformed input or a version mismatch.
Trajectory trajectory_from_json(const std::string& text);
void save_trajectory(const std::string& path, const Trajectory& t);
Trajectory load_trajectory(const std::string& path);

}  // namespace ibrsim::env
