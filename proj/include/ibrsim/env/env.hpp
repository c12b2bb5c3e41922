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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ibrsim/geometry/dataset.hpp"
#include "ibrsim/ibr/pipeline.hpp"
#include "ibrsim/mesh/bvh.hpp"
#include "ibrsim/nn/filler.hpp"
#include "ibrsim/synth/scene.hpp"

namespace ibrsim::env {

enum class Action : std::uint8_t { kForward, kBackward, kLeft, kRight };

std::optional<Action> parse_action(std::string_view name);
const char* action_name(Action a);

// Values are the wire enum.
enum class Modality : std::uint8_t {
  kRgbPre = 0,
  kRgbPost = 1,
  kDepth = 2,
  kNormal = 3,
  kSemantic = 4,
};
inline constexpr int kModalityCount = 5;

std::optional<Modality> parse_modality(std::string_view name);
const char* modality_name(Modality m);

class ModalitySet {
 public:
  ModalitySet() = default;
  ModalitySet(std::initializer_list<Modality> ms) {
    for (Modality m : ms) add(m);
  }
  void add(Modality m) { bits_ |= bit(m); }
  bool has(Modality m) const { return (bits_ & bit(m)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::vector<Modality> list() const;
  friend bool operator==(const ModalitySet&, const ModalitySet&) = default;

 private:
  static std::uint8_t bit(Modality m) {
    return static_cast<std::uint8_t>(1u << static_cast<int>(m));
  }
  std::uint8_t bits_ = 0;
};

enum class TaskKind { kLocalPlanning, kDistantNavigation };

struct TaskSpec {
  TaskKind kind = TaskKind::kLocalPlanning;
  // Fixed goal for distant navigation; drawn from `seed` when absent.
  std::optional<geom::Vec3> target;
  double local_min = 1.0;  // nearby-target annulus for local planning
  double local_max = 3.0;
  int max_steps = 400;
  double collision_penalty = 0.1;
  double beam_c = 0;  // weight of the forward free-space term
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct EnvConfig {
  double step_m = 0.1;
  double turn_deg = 15;
  double done_radius = 0.3;
  double dt = 0.1;  // seconds per step, for the velocity reading
  double agent_radius = 0.2;
  double camera_height = 1.6;
  double beam_range = 20;
  int resolution = 128;  // square observation side
  ibr::RenderConfig render;  // width and height are set from `resolution`

  void validate() const;
};

struct AgentState {
  geom::Pose6D pose;
  double velocity = 0;
  int collisions = 0;
  int step = 0;
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

// Sensor vector layout.
enum Sensor : int {
  kSensorX, kSensorY, kSensorZ, kSensorYaw, kSensorVelocity,
  kSensorDistance, kSensorBearing, kSensorCount
};

struct Observation {
  std::map<Modality, Image> images;
  std::array<double, kSensorCount> sensors{};
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct StepInfo {
  int collisions = 0;
  int step = 0;
  bool collided = false;
  double potential_reward = 0;  // the -delta(distance) term alone
  friend bool operator==(const StepInfo&, const StepInfo&) = default;
};

struct StepResult {
  Observation observation;
  double reward = 0;
  bool done = false;
  StepInfo info;
  friend bool operator==(const StepResult&, const StepResult&) = default;
};

// Immutable scene assets shared by any number of environments.
struct Assets {
  mesh::TriangleMesh mesh;
  mesh::Bvh bvh;
  geom::PanoramaDataset dataset;
  std::optional<nn::FillerNet<float>> filler;

  Assets(mesh::TriangleMesh m, geom::PanoramaDataset ds,
         std::optional<nn::FillerNet<float>> f = std::nullopt);
};

// Distances enter rewards on a 2^-20 m grid so that potential differences
// are exact in double precision and sum to the net change.
double quantize_potential(double distance);

// 90 degree (by default) pinhole view looking along +x of the panorama frame,
// sampled nearest-pixel so labels and depths pass through unchanged.
Image perspective_crop(const Image& equirect, int size, double fov_deg = 90);

class Env {
 public:
  Env(std::shared_ptr<const Assets> assets, const EnvConfig& cfg = {});

  Observation reset(const TaskSpec& task, std::uint64_t seed);
  // Starts an episode at a caller-chosen pose. Local-planning targets are
  // still drawn from `seed`. Throws InvalidPoseError if `start` collides.
  Observation reset_to(const TaskSpec& task, const geom::Pose6D& start,
                       std::uint64_t seed = 0);
  StepResult step(Action a);
  Observation observe(const geom::Pose6D& pose, ModalitySet ms) const;
  Observation observe() const { return observe(state_.pose, modalities_); }

  void set_modalities(ModalitySet ms) { modalities_ = ms; }
  ModalitySet modalities() const { return modalities_; }
  const AgentState& state() const { return state_; }
  const geom::Vec3& target() const { return target_; }
  const TaskSpec& task() const { return task_; }
  const EnvConfig& config() const { return cfg_; }
  bool active() const { return active_; }
  bool done() const { return done_; }
  double distance_to_target(const geom::Pose6D& p) const;
  // True when a camera at `p` intersects the mesh at the agent radius.
  bool pose_collides(const geom::Pose6D& p) const;
  const synth::FreeSpace& free_space() const { return space_; }

 private:
  std::optional<geom::Pose6D> try_move(const geom::Pose6D& from,
                                       double dist) const;
  std::array<double, kSensorCount> sensors(const AgentState& s) const;
  std::optional<geom::Vec3> fixed_target(const TaskSpec& task) const;
  Observation begin(const TaskSpec& task, const geom::Pose6D& start,
                    const geom::Vec3& target);

  std::shared_ptr<const Assets> assets_;
  EnvConfig cfg_;
  synth::FreeSpace space_;
  ModalitySet modalities_{Modality::kRgbPre, Modality::kDepth};
  TaskSpec task_;
  AgentState state_;
  geom::Vec3 target_ = geom::Vec3::Zero();
  bool active_ = false;
  bool done_ = false;
};

}  // namespace ibrsim::env
