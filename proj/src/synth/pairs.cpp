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


#include "ibrsim/synth/pairs.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ibrsim/common/bytes.hpp"
#include "ibrsim/common/rng.hpp"
#include "ibrsim/mesh/render.hpp"

namespace ibrsim::synth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kPairsVersion = 1;

std::string numbered(const char* stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04zu.ppm", stem, i);
  return buf;
}

}  // namespace

std::vector<geom::Pose6D> random_free_poses(const mesh::TriangleMesh& mesh,
                                            const mesh::Bvh& bvh, int count,
                                            const PoseSampling& cfg) {
  const FreeSpace space = free_space(mesh, bvh, cfg);
  Rng rng(cfg.seed);
  std::vector<geom::Pose6D> poses;
  int guard = 0;
  while (static_cast<int>(poses.size()) < count) {
    if (++guard > 100 * count + 1000) {
      throw GenerationError("could not find collision-free camera poses");
    }
    const auto& cell = space.cells[rng.next() % space.cells.size()];
    const mesh::Vec3 c = space.grid.center(cell);
    const mesh::Vec3 eye(c.x(), c.y(), c.z() + cfg.camera_height);
    if (mesh::sphere_collision(mesh, bvh, eye, cfg.agent_radius).colliding) {
      continue;
    }
    poses.push_back(geom::Pose6D::make(
        eye.x(), eye.y(), eye.z(), 0, 0,
        rng.uniform(-std::numbers::pi, std::numbers::pi)));
  }
  return poses;
}

Image crop(const Image& img, int u0, int v0, int w, int h) {
  if (u0 < 0 || v0 < 0 || u0 + w > img.width() || v0 + h > img.height()) {
    throw BoundsError("crop window outside the image");
  }
  Image out(w, h, img.channels());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      for (int c = 0; c < img.channels(); ++c) {
        out.at(u, v, c) = img.at(u0 + u, v0 + v, c);
      }
      out.set_valid(u, v, img.valid(u0 + u, v0 + v));
    }
  }
  return out;
}

PairSet generate_pairs(const mesh::TriangleMesh& mesh, const mesh::Bvh& bvh,
                       const geom::PanoramaDataset& dataset,
                       const PairSpec& spec) {
  spec.render.validate();
  spec.corruption.validate();
  const int W = spec.render.width, H = spec.render.height;
  if (spec.count < 1 || spec.crops_per_pose < 1 || spec.crop < 1 ||
      spec.crop > W || spec.crop + 2 * spec.row_margin > H) {
    throw InvalidArgumentError("pair crop does not fit the render size");
  }
  const int n_poses =
      (spec.count + spec.crops_per_pose - 1) / spec.crops_per_pose;
  PoseSampling ps;
  ps.seed = mix_seed(spec.seed, 0);
  const auto poses = random_free_poses(mesh, bvh, n_poses, ps);
  Rng rng(mix_seed(spec.seed, 1));
  PairSet set;
  for (const auto& pose : poses) {
    const Image depth = mesh::render_equirect(mesh, bvh, pose, W, H,
                                              mesh::Modality::kDepth);
    Image source = quantize_rgb8(
        ibr::render_view(dataset, depth, pose, spec.render).image);
    for (int v = 0; v < H; ++v) {
      for (int u = 0; u < W; ++u) {
        if (source.valid(u, v)) continue;
        for (int c = 0; c < 3; ++c) source.at(u, v, c) = 0;
      }
    }
    const Image truth = quantize_rgb8(mesh::render_equirect(
        mesh, bvh, pose, W, H, mesh::Modality::kAlbedo));
    for (int k = 0; k < spec.crops_per_pose &&
                    static_cast<int>(set.pairs.size()) < spec.count;
         ++k) {
      const int u0 = static_cast<int>(rng.next() % (W - spec.crop + 1));
      const int v0 = spec.row_margin + static_cast<int>(
          rng.next() % (H - 2 * spec.row_margin - spec.crop + 1));
      PairRecord rec{pose, u0, v0, 0};
      Image s = crop(source, u0, v0, spec.crop, spec.crop);
      rec.hole_fraction =
          1.0 - static_cast<double>(s.valid_count()) / s.pixel_count();
      // Holes are part of the input signal, not missing data.
      std::fill(s.mask().begin(), s.mask().end(), std::uint8_t{1});
      Image clean = crop(truth, u0, v0, spec.crop, spec.crop);
      Image target = quantize_rgb8(
          make_domain_pair(clean, spec.corruption, set.pairs.size()));
      set.pairs.push_back({std::move(s), std::move(target)});
      set.records.push_back(rec);
      set.clean.push_back(std::move(clean));
    }
  }
  return set;
}

void save_pairs(const std::string& dir, const PairSet& set) {
  fs::create_directories(dir);
  json items = json::array();
  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    json item = {{"source", numbered("source", i)},
                 {"target", numbered("target", i)}};
    write_ppm((fs::path(dir) / numbered("source", i)).string(),
              set.pairs[i].source);
    write_ppm((fs::path(dir) / numbered("target", i)).string(),
              set.pairs[i].target);
    if (i < set.clean.size()) {
      item["clean"] = numbered("clean", i);
      write_ppm((fs::path(dir) / numbered("clean", i)).string(), set.clean[i]);
    }
    if (i < set.records.size()) {
      const auto& r = set.records[i];
      item["pose"] = {r.pose.x, r.pose.y, r.pose.z,
                      r.pose.roll, r.pose.pitch, r.pose.yaw};
      item["u0"] = r.u0;
      item["v0"] = r.v0;
      item["hole_fraction"] = r.hole_fraction;
    }
    items.push_back(item);
  }
  const int w = set.pairs.empty() ? 0 : set.pairs[0].source.width();
  const int h = set.pairs.empty() ? 0 : set.pairs[0].source.height();
  const json j = {{"version", kPairsVersion},
                  {"count", set.pairs.size()},
                  {"width", w},
                  {"height", h},
                  {"pairs", items}};
  write_text_file((fs::path(dir) / "pairs.json").string(), j.dump(2));
}

PairSet load_pairs(const std::string& dir) {
  json j;
  try {
    j = json::parse(read_text_file((fs::path(dir) / "pairs.json").string()));
  } catch (const json::exception& e) {
    throw FormatError(std::string("pairs.json: ") + e.what());
  }
  PairSet set;
  try {
    if (j.at("version").get<int>() != kPairsVersion) {
      throw FormatError("unsupported pairs version");
    }
    for (const auto& item : j.at("pairs")) {
      nn::ImagePair p{
          read_ppm((fs::path(dir) / item.at("source").get<std::string>())
                       .string()),
          read_ppm((fs::path(dir) / item.at("target").get<std::string>())
                       .string())};
      if (!p.source.same_shape(p.target)) {
        throw FormatError("pair images differ in shape");
      }
      set.pairs.push_back(std::move(p));
      if (item.contains("clean")) {
        set.clean.push_back(read_ppm(
            (fs::path(dir) / item.at("clean").get<std::string>()).string()));
      }
      if (item.contains("pose")) {
        const auto& a = item.at("pose");
        PairRecord r;
        r.pose = geom::Pose6D::make(a[0], a[1], a[2], a[3], a[4], a[5]);
        r.u0 = item.value("u0", 0);
        r.v0 = item.value("v0", 0);
        r.hole_fraction = item.value("hole_fraction", 0.0);
        set.records.push_back(r);
      }
    }
    if (set.pairs.size() != j.at("count").get<std::size_t>()) {
      throw FormatError("pair count does not match pairs.json");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("pairs.json: ") + e.what());
  }
  return set;
}

}  // namespace ibrsim::synth
