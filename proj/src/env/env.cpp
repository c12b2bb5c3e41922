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


#include "ibrsim/env/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ibrsim/common/error.hpp"
#include "ibrsim/common/rng.hpp"
#include "ibrsim/geometry/equirect.hpp"
#include "ibrsim/mesh/collision.hpp"
#include "ibrsim/mesh/navigation.hpp"
#include "ibrsim/mesh/render.hpp"
#include "ibrsim/nn/train.hpp"

namespace ibrsim::env {

using geom::Pose6D;
using geom::Vec3;

namespace {

constexpr std::array<const char*, 4> kActionNames = {"forward", "backward",
                                                     "left", "right"};
constexpr std::array<const char*, kModalityCount> kModalityNames = {
    "rgb_pre", "rgb_post", "depth", "normal", "semantic"};
constexpr int kPlacementTries = 10000;

}  // namespace

std::optional<Action> parse_action(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (name == kActionNames[i]) return static_cast<Action>(i);
  }
  return std::nullopt;
}

const char* action_name(Action a) {
  return kActionNames.at(static_cast<std::size_t>(a));
}

std::optional<Modality> parse_modality(std::string_view name) {
  for (std::size_t i = 0; i < kModalityNames.size(); ++i) {
    if (name == kModalityNames[i]) return static_cast<Modality>(i);
  }
  return std::nullopt;
}

const char* modality_name(Modality m) {
  return kModalityNames.at(static_cast<std::size_t>(m));
}

std::vector<Modality> ModalitySet::list() const {
  std::vector<Modality> out;
  for (int i = 0; i < kModalityCount; ++i) {
    if (has(static_cast<Modality>(i))) out.push_back(static_cast<Modality>(i));
  }
  return out;
}

void TaskSpec::validate() const {
  if (!(local_min > 0 && local_min <= local_max)) {
    throw InvalidArgumentError("local target range must satisfy 0 < min <= max");
  }
  if (max_steps < 1) throw InvalidArgumentError("max_steps must be >= 1");
  if (!(collision_penalty >= 0) || !(beam_c >= 0)) {
    throw InvalidArgumentError("penalty and beam weight must be >= 0");
  }
}

void EnvConfig::validate() const {
  for (double v : {step_m, turn_deg, done_radius, dt, agent_radius,
                   camera_height, beam_range}) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw InvalidArgumentError("environment constants must be > 0");
    }
  }
  if (resolution < 8 || resolution % 4 != 0) {
    throw InvalidArgumentError("resolution must be a multiple of 4, >= 8");
  }
}

Assets::Assets(mesh::TriangleMesh m, geom::PanoramaDataset ds,
               std::optional<nn::FillerNet<float>> f)
    : mesh(std::move(m)), bvh(mesh), dataset(std::move(ds)),
      filler(std::move(f)) {}

double quantize_potential(double distance) {
  return std::ldexp(std::round(std::ldexp(distance, 20)), -20);
}

Image perspective_crop(const Image& eq, int size, double fov_deg) {
  if (!eq.is_equirect()) throw ShapeError("crop source must be 2:1");
  if (size < 1 || !(fov_deg > 0 && fov_deg < 180)) {
    throw InvalidArgumentError("bad perspective crop parameters");
  }
  const double f = 0.5 * size / std::tan(fov_deg * std::numbers::pi / 360.0);
  Image out(size, size, eq.channels(), 0.0f, false);
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      const Vec3 d(f, -(i + 0.5 - 0.5 * size), -(j + 0.5 - 0.5 * size));
      const auto pc = geom::pixel_from_dir(d, eq.width(), eq.height());
      const int u = geom::wrap_pixel_u(pc.u, eq.width());
      const int v = geom::clamp_pixel_v(pc.v, eq.height());
      for (int c = 0; c < eq.channels(); ++c) out.at(i, j, c) = eq.at(u, v, c);
      out.set_valid(i, j, eq.valid(u, v));
    }
  }
  return out;
}

Env::Env(std::shared_ptr<const Assets> assets, const EnvConfig& cfg)
    : assets_(std::move(assets)), cfg_(cfg) {
  if (!assets_) throw InvalidArgumentError("environment needs assets");
  cfg_.validate();
  cfg_.render.width = cfg_.resolution;
  cfg_.render.height = cfg_.resolution / 2;
  cfg_.render.validate();
  synth::PoseSampling ps;
  ps.camera_height = cfg_.camera_height;
  ps.agent_radius = cfg_.agent_radius;
  space_ = synth::free_space(assets_->mesh, assets_->bvh, ps);
}

bool Env::pose_collides(const Pose6D& p) const {
  return mesh::sphere_collision(assets_->mesh, assets_->bvh, p.position(),
                                cfg_.agent_radius)
      .colliding;
}

double Env::distance_to_target(const Pose6D& p) const {
  return (p.position() - target_).norm();
}

std::optional<Vec3> Env::fixed_target(const TaskSpec& task) const {
  if (task.kind != TaskKind::kDistantNavigation) return std::nullopt;
  const auto& grid = space_.grid;
  if (task.target) {
    const mesh::Cell c = grid.cell_of(task.target->x(), task.target->y());
    if (std::find(space_.cells.begin(), space_.cells.end(), c) ==
        space_.cells.end()) {
      throw InvalidArgumentError("target is not on traversable area");
    }
    return *task.target;
  }
  Rng rng(mix_seed(task.seed, 1));
  const Vec3 p = grid.center(space_.cells[rng.next() % space_.cells.size()]);
  return Vec3(p.x(), p.y(), p.z() + cfg_.camera_height);
}

Observation Env::begin(const TaskSpec& task, const Pose6D& start,
                       const Vec3& target) {
  task_ = task;
  target_ = target;
  state_ = AgentState{start, 0, 0, 0};
  active_ = true;
  done_ = false;
  return observe();
}

Observation Env::reset(const TaskSpec& task, std::uint64_t seed) {
  task.validate();
  const std::optional<Vec3> fixed = fixed_target(task);
  const auto& grid = space_.grid;
  auto camera_at = [&](std::uint64_t r) {
    const Vec3 p = grid.center(space_.cells[r % space_.cells.size()]);
    return Vec3(p.x(), p.y(), p.z() + cfg_.camera_height);
  };
  Rng rng(mix_seed(seed, 0));
  for (int attempt = 0; attempt < kPlacementTries; ++attempt) {
    const Vec3 start = camera_at(rng.next());
    const double yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const Pose6D pose = Pose6D::make(start.x(), start.y(), start.z(), 0, 0, yaw);
    if (pose_collides(pose)) continue;
    Vec3 target;
    if (fixed) {
      target = *fixed;
      if ((target - start).norm() < cfg_.done_radius) continue;
    } else {
      target = camera_at(rng.next());
      const double d = (target - start).norm();
      if (d < task.local_min || d > task.local_max) continue;
    }
    return begin(task, pose, target);
  }
  throw GenerationError("no valid start and target placement found");
}

Observation Env::reset_to(const TaskSpec& task, const Pose6D& start,
                          std::uint64_t seed) {
  task.validate();
  if (pose_collides(start)) throw InvalidPoseError("start pose collides");
  if (const auto fixed = fixed_target(task)) return begin(task, start, *fixed);
  const auto& grid = space_.grid;
  Rng rng(mix_seed(seed, 0));
  for (int attempt = 0; attempt < kPlacementTries; ++attempt) {
    const Vec3 p = grid.center(space_.cells[rng.next() % space_.cells.size()]);
    const Vec3 target(p.x(), p.y(), p.z() + cfg_.camera_height);
    const double d = (target - start.position()).norm();
    if (d >= task.local_min && d <= task.local_max) {
      return begin(task, start, target);
    }
  }
  throw GenerationError("no local target within range of the start pose");
}

std::optional<Pose6D> Env::try_move(const Pose6D& from, double dist) const {
  const double x = from.x + dist * std::cos(from.yaw);
  const double y = from.y + dist * std::sin(from.yaw);
  mesh::AgentBody body;
  body.radius = cfg_.agent_radius;
  body.camera_height = cfg_.camera_height;
  const double base = from.z - cfg_.camera_height;
  const auto floor = mesh::floor_height(
      assets_->bvh, assets_->mesh, x, y,
      {base - body.max_step_up, base + body.max_step_up});
  if (!floor) return std::nullopt;
  if (mesh::body_collides(assets_->mesh, assets_->bvh, body,
                          Vec3(x, y, *floor))) {
    return std::nullopt;
  }
  const Pose6D to = Pose6D::make(x, y, *floor + cfg_.camera_height, from.roll,
                                 from.pitch, from.yaw);
  if (pose_collides(to)) return std::nullopt;
  return to;
}

StepResult Env::step(Action a) {
  if (!active_) throw StateError("step before reset");
  if (done_) throw StateError("episode is over; call reset");
  const double before = quantize_potential(distance_to_target(state_.pose));
  StepResult r;
  AgentState next = state_;
  next.velocity = 0;
  const double turn = cfg_.turn_deg * std::numbers::pi / 180.0;
  switch (a) {
    case Action::kForward:
    case Action::kBackward: {
      const double d = a == Action::kForward ? cfg_.step_m : -cfg_.step_m;
      if (auto moved = try_move(state_.pose, d)) {
        next.pose = *moved;
        next.velocity = d / cfg_.dt;
      } else {
        r.info.collided = true;
        ++next.collisions;
      }
      break;
    }
    case Action::kLeft:
    case Action::kRight: {
      const Pose6D& p = state_.pose;
      next.pose = Pose6D::make(p.x, p.y, p.z, p.roll, p.pitch,
                               p.yaw + (a == Action::kLeft ? turn : -turn));
      break;
    }
  }
  ++next.step;
  state_ = next;

  const double dist = distance_to_target(state_.pose);
  r.info.potential_reward = before - quantize_potential(dist);
  r.reward = r.info.potential_reward;
  if (r.info.collided) r.reward -= task_.collision_penalty;
  if (task_.beam_c > 0) {
    const auto t = geom::pose_to_transform(state_.pose);
    r.reward += task_.beam_c *
                mesh::beam_length(assets_->bvh, state_.pose.position(),
                                  t.apply_rotation(Vec3::UnitX()),
                                  cfg_.beam_range);
  }
  r.info.collisions = state_.collisions;
  r.info.step = state_.step;
  done_ = dist < cfg_.done_radius || state_.step >= task_.max_steps;
  r.done = done_;
  r.observation = observe();
  return r;
}

std::array<double, kSensorCount> Env::sensors(const AgentState& s) const {
  std::array<double, kSensorCount> v{};
  v[kSensorX] = s.pose.x;
  v[kSensorY] = s.pose.y;
  v[kSensorZ] = s.pose.z;
  v[kSensorYaw] = s.pose.yaw;
  v[kSensorVelocity] = s.velocity;
  v[kSensorDistance] = distance_to_target(s.pose);
  v[kSensorBearing] = geom::wrap_angle(
      std::atan2(target_.y() - s.pose.y, target_.x() - s.pose.x) - s.pose.yaw);
  return v;
}

Observation Env::observe(const Pose6D& pose, ModalitySet ms) const {
  Observation obs;
  AgentState s = state_;
  s.pose = pose;
  obs.sensors = sensors(s);
  if (ms.empty()) return obs;
  const int R = cfg_.resolution, W = cfg_.render.width, H = cfg_.render.height;
  const auto& m = assets_->mesh;
  const auto& bvh = assets_->bvh;
  const bool rgb = ms.has(Modality::kRgbPre) || ms.has(Modality::kRgbPost);
  Image depth;
  if (rgb || ms.has(Modality::kDepth)) {
    depth = mesh::render_equirect(m, bvh, pose, W, H, mesh::Modality::kDepth);
  }
  if (ms.has(Modality::kDepth)) {
    obs.images[Modality::kDepth] = perspective_crop(depth, R);
  }
  if (rgb) {
    Image pre = perspective_crop(
        ibr::render_view(assets_->dataset, depth, pose, cfg_.render).image, R);
    for (int v = 0; v < R; ++v) {
      for (int u = 0; u < R; ++u) {
        if (pre.valid(u, v)) continue;
        for (int c = 0; c < 3; ++c) pre.at(u, v, c) = 0;
      }
    }
    if (ms.has(Modality::kRgbPost)) {
      if (!assets_->filler) throw StateError("no filler network loaded");
      Image post = nn::apply_net(*assets_->filler, pre);
      for (float& x : post.data()) x = std::clamp(x, 0.0f, 1.0f);
      obs.images[Modality::kRgbPost] = std::move(post);
    }
    if (ms.has(Modality::kRgbPre)) obs.images[Modality::kRgbPre] = std::move(pre);
  }
  if (ms.has(Modality::kNormal)) {
    obs.images[Modality::kNormal] = perspective_crop(
        mesh::render_equirect(m, bvh, pose, W, H, mesh::Modality::kNormal), R);
  }
  if (ms.has(Modality::kSemantic)) {
    obs.images[Modality::kSemantic] = perspective_crop(
        mesh::render_equirect(m, bvh, pose, W, H, mesh::Modality::kSemantic),
        R);
  }
  return obs;
}

}  // namespace ibrsim::env
