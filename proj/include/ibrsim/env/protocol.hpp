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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibrsim/env/env.hpp"

namespace ibrsim::env {

inline constexpr std::uint32_t kFrameMagic = 0x47424E31;
inline constexpr std::size_t kFrameHeaderSize = 24;
inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxControlMessage = 1 << 20;

struct FrameHeader {
  std::uint32_t magic = kFrameMagic;
  std::uint32_t frame_id = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t channels = 0;
  std::uint8_t modality = 0;
  std::uint16_t reserved = 0;
  float reward = 0;
  std::uint32_t payload_bytes = 0;
  friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

struct Frame {
  FrameHeader header;
  std::vector<std::uint8_t> payload;
};

// RGB and normal: 8-bit x 3. Depth: f32 meters, 0 where invalid. Semantic:
// u16 class ids. All little-endian, rows top to bottom.
std::vector<std::uint8_t> encode_frame(std::uint32_t frame_id, Modality m,
                                       const Image& img, float reward);
// Throws FormatError on bad magic, unknown modality or size mismatch.
Frame decode_frame(std::span<const std::uint8_t> bytes);
// Inverse of the payload encoding; 8-bit channels come back as v / 255.
Image frame_image(const Frame& f);
// What a client reconstructs from the wire for `img`.
Image wire_round_trip(Modality m, const Image& img);

nlohmann::json task_to_json(const TaskSpec& t);
TaskSpec task_from_json(const nlohmann::json& j);

nlohmann::json step_to_json(const StepResult& r, std::uint32_t frame_id);

}  // namespace ibrsim::env
