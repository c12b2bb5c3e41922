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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ibrsim/common/error.hpp"

namespace ibrsim {

// Row-major float image with an interleaved channel layout and a per-pixel
// validity mask. Equirectangular panoramas use width == 2 * height, but the
// container itself does not enforce it so perspective crops can reuse it.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f,
        bool valid = true);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return pixel_count() == 0; }
  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  float& at(int u, int v, int c = 0) {
    return data_[(static_cast<std::size_t>(v) * width_ + u) * channels_ + c];
  }
  float at(int u, int v, int c = 0) const {
    return data_[(static_cast<std::size_t>(v) * width_ + u) * channels_ + c];
  }
  bool valid(int u, int v) const {
    return mask_[static_cast<std::size_t>(v) * width_ + u] != 0;
  }
  void set_valid(int u, int v, bool value) {
    mask_[static_cast<std::size_t>(v) * width_ + u] = value ? 1 : 0;
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::span<std::uint8_t> mask() { return mask_; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  std::size_t valid_count() const;

  // Equirectangular geometry requires a 2:1 aspect.
  bool is_equirect() const { return width_ == 2 * height_ && height_ > 0; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
  std::vector<std::uint8_t> mask_;
};

// Binary PPM (P6, maxval 255). Values are clamped to [0,1] and rounded.
void write_ppm(const std::string& path, const Image& rgb);
Image read_ppm(const std::string& path);
// Binary PGM (P5) of the validity mask or a single channel in [0,1].
void write_pgm_mask(const std::string& path, const Image& img,
                    bool invert = false);
// Little-endian float32 raster; non-positive or non-finite values read back
// as invalid pixels.
void write_depth_bin(const std::string& path, const Image& depth);
Image read_depth_bin(const std::string& path, int width, int height);

// Rounds every channel to the nearest 1/255 step, as written to a PPM.
Image quantize_rgb8(const Image& rgb);

}  // namespace ibrsim
