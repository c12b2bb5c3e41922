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


#include "ibrsim/env/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "ibrsim/common/bytes.hpp"

namespace ibrsim::env {

using nlohmann::json;

namespace {

int wire_channels(Modality m) {
  return (m == Modality::kDepth || m == Modality::kSemantic) ? 1 : 3;
}

std::size_t bytes_per_value(Modality m) {
  switch (m) {
    case Modality::kDepth: return 4;
    case Modality::kSemantic: return 2;
    default: return 1;
  }
}

std::uint8_t to_u8(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255));
}

}  // namespace

std::vector<std::uint8_t> encode_frame(std::uint32_t frame_id, Modality m,
                                       const Image& img, float reward) {
  const int ch = wire_channels(m);
  if (img.channels() != ch) throw ShapeError("image channels do not match modality");
  if (img.width() > 0xFFFF || img.height() > 0xFFFF) {
    throw ShapeError("frame too large for the wire header");
  }
  ByteWriter w;
  const std::size_t payload = img.pixel_count() * ch * bytes_per_value(m);
  w.put<std::uint32_t>(kFrameMagic);
  w.put<std::uint32_t>(frame_id);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(img.width()));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(img.height()));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(ch));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(m));
  w.put<std::uint16_t>(0);
  w.put<float>(reward);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(payload));
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      for (int c = 0; c < ch; ++c) {
        const float x = img.at(u, v, c);
        switch (m) {
          case Modality::kDepth:
            w.put<float>(img.valid(u, v) ? x : 0.0f);
            break;
          case Modality::kSemantic:
            w.put<std::uint16_t>(static_cast<std::uint16_t>(
                img.valid(u, v) ? std::lround(std::max(x, 0.0f)) : 0));
            break;
          default:
            w.put<std::uint8_t>(to_u8(x));
        }
      }
    }
  }
  return w.take();
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Frame f;
  auto& h = f.header;
  h.magic = r.get<std::uint32_t>();
  if (h.magic != kFrameMagic) throw FormatError("bad frame magic");
  h.frame_id = r.get<std::uint32_t>();
  h.width = r.get<std::uint16_t>();
  h.height = r.get<std::uint16_t>();
  h.channels = r.get<std::uint8_t>();
  h.modality = r.get<std::uint8_t>();
  h.reserved = r.get<std::uint16_t>();
  h.reward = r.get<float>();
  h.payload_bytes = r.get<std::uint32_t>();
  if (h.modality >= kModalityCount) throw FormatError("unknown modality");
  const auto m = static_cast<Modality>(h.modality);
  if (h.channels != wire_channels(m)) throw FormatError("bad channel count");
  const std::size_t want = std::size_t{h.width} * h.height * h.channels *
                           bytes_per_value(m);
  if (h.payload_bytes != want || r.remaining() != want) {
    throw FormatError("frame payload size mismatch");
  }
  const auto p = r.get_bytes(want);
  f.payload.assign(p.begin(), p.end());
  return f;
}

Image frame_image(const Frame& f) {
  const auto& h = f.header;
  const auto m = static_cast<Modality>(h.modality);
  Image img(h.width, h.height, h.channels);
  ByteReader r(f.payload);
  for (int v = 0; v < h.height; ++v) {
    for (int u = 0; u < h.width; ++u) {
      for (int c = 0; c < h.channels; ++c) {
        switch (m) {
          case Modality::kDepth: {
            const float d = r.get<float>();
            img.at(u, v) = d;
            img.set_valid(u, v, d > 0);
            break;
          }
          case Modality::kSemantic:
            img.at(u, v) = static_cast<float>(r.get<std::uint16_t>());
            break;
          default:
            img.at(u, v, c) = r.get<std::uint8_t>() / 255.0f;
        }
      }
    }
  }
  return img;
}

Image wire_round_trip(Modality m, const Image& img) {
  return frame_image(decode_frame(encode_frame(0, m, img, 0)));
}

json task_to_json(const TaskSpec& t) {
  json j = {{"kind", t.kind == TaskKind::kLocalPlanning ? "local_planning"
                                                        : "distant_navigation"},
            {"local_min", t.local_min},
            {"local_max", t.local_max},
            {"max_steps", t.max_steps},
            {"collision_penalty", t.collision_penalty},
            {"beam_c", t.beam_c},
            {"seed", t.seed}};
  if (t.target) j["target"] = {t.target->x(), t.target->y(), t.target->z()};
  return j;
}

TaskSpec task_from_json(const json& j) {
  TaskSpec t;
  try {
    const std::string kind = j.value("kind", "local_planning");
    if (kind == "local_planning") {
      t.kind = TaskKind::kLocalPlanning;
    } else if (kind == "distant_navigation") {
      t.kind = TaskKind::kDistantNavigation;
    } else {
      throw FormatError("unknown task kind '" + kind + "'");
    }
    t.local_min = j.value("local_min", t.local_min);
    t.local_max = j.value("local_max", t.local_max);
    t.max_steps = j.value("max_steps", t.max_steps);
    t.collision_penalty = j.value("collision_penalty", t.collision_penalty);
    t.beam_c = j.value("beam_c", t.beam_c);
    t.seed = j.value("seed", t.seed);
    if (j.contains("target")) {
      const auto& a = j.at("target");
      if (!a.is_array() || a.size() != 3) throw FormatError("target needs xyz");
      t.target = geom::Vec3(a[0].get<double>(), a[1].get<double>(),
                            a[2].get<double>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("task: ") + e.what());
  }
  t.validate();
  return t;
}

json step_to_json(const StepResult& r, std::uint32_t frame_id) {
  json modalities = json::array();
  for (const auto& [m, img] : r.observation.images) {
    modalities.push_back(modality_name(m));
  }
  return {{"type", "step_result"},
          {"frame_id", frame_id},
          {"reward", r.reward},
          {"done", r.done},
          {"collisions", r.info.collisions},
          {"step", r.info.step},
          {"collided", r.info.collided},
          {"potential_reward", r.info.potential_reward},
          {"sensors", r.observation.sensors},
          {"modalities", modalities}};
}

}  // namespace ibrsim::env
