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

#include "ibrsim/geometry/dataset.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "ibrsim/common/bytes.hpp"

namespace ibrsim::geom {

namespace fs = std::filesystem;
using nlohmann::json;

const PanoramaView& PanoramaDataset::by_id(int id) const {
  for (const auto& v : views) {
    if (v.id == id) return v;
  }
  throw InvalidArgumentError("no panorama with id " + std::to_string(id));
}

void PanoramaDataset::save(const std::string& dir) const {
  fs::create_directories(dir);
  json poses = json::array();
  for (const auto& view : views) {
    poses.push_back({{"id", view.id},
                     {"x", view.pose.x},
                     {"y", view.pose.y},
                     {"z", view.pose.z},
                     {"roll", view.pose.roll},
                     {"pitch", view.pose.pitch},
                     {"yaw", view.pose.yaw},
                     {"width", view.rgb.width()},
                     {"height", view.rgb.height()}});
    const std::string id = std::to_string(view.id);
    write_ppm((fs::path(dir) / ("rgb_" + id + ".ppm")).string(), view.rgb);
    write_depth_bin((fs::path(dir) / ("depth_" + id + ".bin")).string(),
                    view.depth);
  }
  write_text_file((fs::path(dir) / "poses.json").string(), poses.dump(2));
}

PanoramaDataset PanoramaDataset::load(const std::string& dir) {
  json poses;
  try {
    poses = json::parse(read_text_file((fs::path(dir) / "poses.json").string()));
  } catch (const json::exception& e) {
    throw FormatError(std::string("poses.json: ") + e.what());
  }
  if (!poses.is_array()) throw FormatError("poses.json must be an array");
  PanoramaDataset ds;
  for (const auto& entry : poses) {
    try {
      PanoramaView view;
      view.id = entry.at("id").get<int>();
      view.pose = Pose6D::make(entry.at("x"), entry.at("y"), entry.at("z"),
                               entry.at("roll"), entry.at("pitch"),
                               entry.at("yaw"));
      const int w = entry.at("width"), h = entry.at("height");
      const std::string id = std::to_string(view.id);
      view.rgb = read_ppm((fs::path(dir) / ("rgb_" + id + ".ppm")).string());
      view.depth = read_depth_bin(
          (fs::path(dir) / ("depth_" + id + ".bin")).string(), w, h);
      if (view.rgb.width() != w || view.rgb.height() != h) {
        throw FormatError("rgb_" + id + ".ppm size disagrees with poses.json");
      }
      ds.views.push_back(std::move(view));
    } catch (const json::exception& e) {
      throw FormatError(std::string("poses.json entry: ") + e.what());
    }
  }
  return ds;
}

}  // namespace ibrsim::geom
