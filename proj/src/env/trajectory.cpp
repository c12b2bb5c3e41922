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


#include "ibrsim/env/trajectory.hpp"

#include <bit>

#include <nlohmann/json.hpp>

#include "ibrsim/common/bytes.hpp"
#include "ibrsim/env/protocol.hpp"

namespace ibrsim::env {

using nlohmann::json;

Trajectory record(Env& env, const TaskSpec& task, std::uint64_t seed,
                  const std::vector<Action>& actions,
                  std::vector<StepResult>* results) {
  Trajectory t{task, seed, {}};
  env.reset(task, seed);
  for (Action a : actions) {
    if (env.done()) break;
    StepResult r = env.step(a);
    t.steps.push_back({a, r.reward, r.done, r.info.collisions});
    if (results) results->push_back(std::move(r));
  }
  return t;
}

std::vector<StepResult> replay(Env& env, const Trajectory& t) {
  std::vector<StepResult> out;
  if (t.steps.empty()) return out;
  env.reset(t.task, t.seed);
  for (const auto& s : t.steps) out.push_back(env.step(s.action));
  return out;
}

bool replay_matches(const Trajectory& t, const std::vector<StepResult>& r) {
  if (r.size() != t.steps.size()) return false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& s = t.steps[i];
    if (std::bit_cast<std::uint64_t>(s.reward) !=
            std::bit_cast<std::uint64_t>(r[i].reward) ||
        s.done != r[i].done || s.collisions != r[i].info.collisions) {
      return false;
    }
  }
  return true;
}

std::string trajectory_to_json(const Trajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"action", action_name(s.action)},
                     {"reward", s.reward},
                     {"done", s.done},
                     {"collisions", s.collisions}});
  }
  const json j = {{"format", "ibrsim-trajectory"},
                  {"version", kTrajectoryVersion},
                  {"seed", t.seed},
                  {"task", task_to_json(t.task)},
                  {"steps", steps}};
  return j.dump();
}

Trajectory trajectory_from_json(const std::string& text) {
  Trajectory t;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "ibrsim-trajectory") {
      throw FormatError("not a trajectory file");
    }
    const int version = j.at("version").get<int>();
    if (version != kTrajectoryVersion) {
      throw FormatError("trajectory version " + std::to_string(version) +
                        " is not supported");
    }
    t.seed = j.at("seed").get<std::uint64_t>();
    t.task = task_from_json(j.at("task"));
    for (const auto& s : j.at("steps")) {
      const auto a = parse_action(s.at("action").get<std::string>());
      if (!a) throw FormatError("unknown action in trajectory");
      t.steps.push_back({*a, s.at("reward").get<double>(),
                         s.at("done").get<bool>(),
                         s.at("collisions").get<int>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("trajectory: ") + e.what());
  }
  return t;
}

void save_trajectory(const std::string& path, const Trajectory& t) {
  write_text_file(path, trajectory_to_json(t));
}

Trajectory load_trajectory(const std::string& path) {
  return trajectory_from_json(read_text_file(path));
}

}  // namespace ibrsim::env
