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

#include "ibrsim/common/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ibrsim/common/bytes.hpp"

namespace ibrsim {

Image::Image(int width, int height, int channels, float fill, bool valid)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 1) {
    throw ShapeError("image dimensions must be non-negative with >= 1 channel");
  }
  data_.assign(pixel_count() * channels, fill);
  mask_.assign(pixel_count(), valid ? 1 : 0);
}

std::size_t Image::valid_count() const {
  return static_cast<std::size_t>(
      std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

namespace {

std::uint8_t to_u8(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::vector<std::uint8_t>& bytes,
                       std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) {
    tok.push_back(static_cast<char>(bytes[pos++]));
  }
  return tok;
}

}  // namespace

void write_ppm(const std::string& path, const Image& rgb) {
  if (rgb.channels() != 3) throw ShapeError("PPM needs a 3-channel image");
  ByteWriter w;
  w.put_string("P6\n" + std::to_string(rgb.width()) + " " +
               std::to_string(rgb.height()) + "\n255\n");
  for (float v : rgb.data()) w.put(to_u8(v));
  write_file_bytes(path, w.bytes());
}

Image read_ppm(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw FormatError(path + ": not a P6 PPM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(bytes, pos));
    h = std::stoi(next_token(bytes, pos));
    maxval = std::stoi(next_token(bytes, pos));
  } catch (const std::logic_error&) {
    throw FormatError(path + ": malformed PPM header");
  }
  if (maxval != 255 || w <= 0 || h <= 0) {
    throw FormatError(path + ": only 8-bit PPM with positive size supported");
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() < pos + need) throw FormatError(path + ": truncated PPM");
  Image img(w, h, 3);
  auto data = img.data();
  for (std::size_t i = 0; i < need; ++i) {
    data[i] = static_cast<float>(bytes[pos + i]) / 255.0f;
  }
  return img;
}

void write_pgm_mask(const std::string& path, const Image& img, bool invert) {
  ByteWriter w;
  w.put_string("P5\n" + std::to_string(img.width()) + " " +
               std::to_string(img.height()) + "\n255\n");
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      const bool on = img.valid(u, v) != invert;
      w.put<std::uint8_t>(on ? 255 : 0);
    }
  }
  write_file_bytes(path, w.bytes());
}

void write_depth_bin(const std::string& path, const Image& depth) {
  if (depth.channels() != 1) throw ShapeError("depth must be single-channel");
  ByteWriter w;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      w.put<float>(depth.valid(u, v) ? depth.at(u, v) : 0.0f);
    }
  }
  write_file_bytes(path, w.bytes());
}

Image read_depth_bin(const std::string& path, int width, int height) {
  const auto bytes = read_file_bytes(path);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() != n * sizeof(float)) {
    throw FormatError(path + ": depth raster has wrong length");
  }
  Image img(width, height, 1);
  ByteReader r(bytes);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const float d = r.get<float>();
      const bool ok = std::isfinite(d) && d > 0.0f;
      img.at(u, v) = ok ? d : 0.0f;
      img.set_valid(u, v, ok);
    }
  }
  return img;
}

Image quantize_rgb8(const Image& rgb) {
  Image out = rgb;
  for (float& v : out.data()) v = static_cast<float>(to_u8(v)) / 255.0f;
  return out;
}

}  // namespace ibrsim
