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

#include "ibrsim/ibr/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ibrsim/geometry/equirect.hpp"
#include "ibrsim/mesh/render.hpp"

namespace ibrsim::ibr {

void RenderConfig::validate() const {
  if (k < 1) throw InvalidArgumentError("k must be >= 1");
  if (!(depth_eps > 0)) throw InvalidArgumentError("depth_eps must be > 0");
  if (!(kde_bandwidth > 0)) {
    throw InvalidArgumentError("kde_bandwidth must be > 0");
  }
  if (!(r_max > 0)) throw InvalidArgumentError("r_max must be > 0");
  if (width <= 0 || height <= 0) {
    throw InvalidArgumentError("output size must be positive");
  }
}

std::vector<int> select_source_views(const geom::PanoramaDataset& dataset,
                                     const geom::Pose6D& target, int k) {
  if (dataset.empty()) throw EmptyDatasetError("dataset has no views");
  if (k < 1) throw InvalidArgumentError("k must be >= 1");
  struct Candidate {
    double dist2;
    int id;
  };
  std::vector<Candidate> c;
  c.reserve(dataset.views.size());
  for (const auto& v : dataset.views) {
    c.push_back({(v.pose.position() - target.position()).squaredNorm(), v.id});
  }
  const std::size_t n = std::min<std::size_t>(k, c.size());
  std::partial_sort(c.begin(), c.begin() + n, c.end(),
                    [](const Candidate& a, const Candidate& b) {
                      return a.dist2 < b.dist2 ||
                             (a.dist2 == b.dist2 && a.id < b.id);
                    });
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = c[i].id;
  return ids;
}

SplatSet reproject_view(const geom::PanoramaView& source,
                        const geom::Pose6D& target, int width, int height) {
  const Image& depth = source.depth;
  const Image& rgb = source.rgb;
  if (depth.width() != rgb.width() || depth.height() != rgb.height()) {
    throw ShapeError("source rgb/depth size mismatch");
  }
  const geom::RigidTransform to_target =
      geom::pose_to_transform(target).inverse() *
      geom::pose_to_transform(source.pose);
  SplatSet out{source.id, width, height, {}};
  out.splats.reserve(depth.valid_count());
  const int sw = depth.width(), sh = depth.height();
  for (int v = 0; v < sh; ++v) {
    for (int u = 0; u < sw; ++u) {
      if (!depth.valid(u, v) || !rgb.valid(u, v)) continue;
      const double d = depth.at(u, v);
      if (!(d > 0)) continue;
      const geom::Vec3 p = to_target.apply(d * geom::dir_from_pixel(u, v, sw, sh));
      const double r = p.norm();
      if (!(r > 1e-9)) continue;
      const geom::PixelCoord px = geom::pixel_from_dir(p / r, width, height);
      out.splats.push_back(
          {px.u, px.v, static_cast<float>(r),
           Eigen::Vector3f(rgb.at(u, v, 0), rgb.at(u, v, 1), rgb.at(u, v, 2))});
    }
  }
  return out;
}

SplatSet depth_filter(const SplatSet& splats, const Image& target_depth,
                      double depth_eps) {
  if (target_depth.width() != splats.width ||
      target_depth.height() != splats.height) {
    throw ShapeError("target depth size does not match splat image");
  }
  SplatSet out{splats.view_id, splats.width, splats.height, {}};
  out.splats.reserve(splats.size());
  for (const Splat& s : splats.splats) {
    const int i = geom::wrap_pixel_u(s.u, splats.width);
    const int j = geom::clamp_pixel_v(s.v, splats.height);
    if (!target_depth.valid(i, j)) continue;
    if (std::abs(static_cast<double>(s.depth) - target_depth.at(i, j)) <=
        depth_eps) {
      out.splats.push_back(s);
    }
  }
  return out;
}

namespace {

// Splat indices grouped by nearest row, preserving input order per row.
struct RowIndex {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> ids;

  RowIndex(const SplatSet& s) : offsets(s.height + 1, 0), ids(s.size()) {
    for (const Splat& p : s.splats) {
      offsets[geom::clamp_pixel_v(p.v, s.height) + 1]++;
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::uint32_t i = 0; i < s.size(); ++i) {
      ids[cursor[geom::clamp_pixel_v(s.splats[i].v, s.height)]++] = i;
    }
  }
};

void density_row(const SplatSet& s, const RowIndex& rows, double bw, int j,
                 Image& out) {
  const int w = s.width, h = s.height;
  const double radius = kKdeCutoff * bw;
  const double r2 = radius * radius;
  const double inv2s2 = 1.0 / (2.0 * bw * bw);
  const double norm = 1.0 / (2.0 * std::numbers::pi * bw * bw);
  std::vector<double> acc(w, 0.0);
  const int reach = static_cast<int>(std::ceil(radius)) + 1;
  const int r0 = std::max(0, j - reach), r1 = std::min(h - 1, j + reach);
  for (int row = r0; row <= r1; ++row) {
    for (std::size_t k = rows.offsets[row]; k < rows.offsets[row + 1]; ++k) {
      const Splat& p = s.splats[rows.ids[k]];
      const double dy = j - p.v;
      if (dy * dy > r2) continue;
      const double span = std::sqrt(r2 - dy * dy);
      const int i0 = static_cast<int>(std::ceil(p.u - span));
      const int i1 = static_cast<int>(std::floor(p.u + span));
      for (int i = i0; i <= i1; ++i) {
        const double dx = i - p.u;
        const int col = ((i % w) + w) % w;
        acc[col] += std::exp(-(dx * dx + dy * dy) * inv2s2);
      }
    }
  }
  for (int i = 0; i < w; ++i) out.at(i, j) = static_cast<float>(acc[i] * norm);
}

}  // namespace

Image density_map(const SplatSet& splats, double bandwidth, Execution exec) {
  if (!(bandwidth > 0)) throw InvalidArgumentError("bandwidth must be > 0");
  Image out(splats.width, splats.height, 1, 0.0f, true);
  if (splats.splats.empty()) return out;
  const RowIndex rows(splats);
  if (exec == Execution::kSerial) {
    for (int j = 0; j < splats.height; ++j) {
      density_row(splats, rows, bandwidth, j, out);
    }
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (int j = 0; j < splats.height; ++j) {
      density_row(splats, rows, bandwidth, j, out);
    }
  }
  return out;
}

std::vector<Image> view_weights(const std::vector<Image>& densities,
                                double lambda_d,
                                const std::vector<const Image*>& masks) {
  if (densities.empty()) throw InvalidArgumentError("no views to weight");
  const std::size_t k = densities.size();
  if (!masks.empty() && masks.size() != k) {
    throw ShapeError("mask count does not match view count");
  }
  for (std::size_t i = 1; i < k; ++i) {
    if (!densities[i].same_shape(densities[0])) {
      throw ShapeError("density maps differ in size");
    }
  }
  const int w = densities[0].width(), h = densities[0].height();
  std::vector<Image> out(k, Image(w, h, 1, 0.0f, true));
  std::vector<double> e(k);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < k; ++i) {
        if (!masks.empty() && !masks[i]->valid(u, v)) continue;
        best = std::max(best, lambda_d * densities[i].at(u, v));
      }
      if (best == -std::numeric_limits<double>::infinity()) {
        for (std::size_t i = 0; i < k; ++i) {
          out[i].at(u, v) = static_cast<float>(1.0 / k);
        }
        continue;
      }
      double sum = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const bool ok = masks.empty() || masks[i]->valid(u, v);
        e[i] = ok ? std::exp(lambda_d * densities[i].at(u, v) - best) : 0.0;
        sum += e[i];
      }
      for (std::size_t i = 0; i < k; ++i) {
        out[i].at(u, v) = static_cast<float>(e[i] / sum);
      }
    }
  }
  return out;
}

namespace {

constexpr double kCoincident = 1e-6;

// Uniform bucket grid over the target image for radius queries.
class SplatGrid {
 public:
  SplatGrid(const SplatSet& s, double r_max)
      : s_(s), cell_(std::max(1.0, r_max)) {
    nu_ = std::max(1, static_cast<int>(std::ceil(s.width / cell_)));
    nv_ = std::max(1, static_cast<int>(std::ceil((s.height + 1) / cell_)));
    start_.assign(static_cast<std::size_t>(nu_) * nv_ + 1, 0);
    ids_.resize(s.size());
    for (const Splat& p : s.splats) start_[bucket(p) + 1]++;
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    std::vector<std::size_t> cursor(start_.begin(), start_.end() - 1);
    for (std::uint32_t i = 0; i < s.size(); ++i) {
      ids_[cursor[bucket(s.splats[i])]++] = i;
    }
  }

  // Appends bucket indices whose splats may lie within r of pixel (i, j).
  void buckets_near(int i, int j, double r, std::vector<int>& out) const {
    out.clear();
    const int w = s_.width;
    const int bv0 = std::max(0, bv_of(j - r)), bv1 = std::min(nv_ - 1, bv_of(j + r));
    const auto add_u_range = [&](double lo, double hi) {
      const int b0 = std::max(0, bu_of(lo)), b1 = std::min(nu_ - 1, bu_of(hi));
      for (int bu = b0; bu <= b1; ++bu) {
        for (int bv = bv0; bv <= bv1; ++bv) out.push_back(bv * nu_ + bu);
      }
    };
    if (2 * r >= w) {
      add_u_range(0, w);
    } else {
      add_u_range(std::max(0.0, i - r), std::min<double>(w, i + r));
      if (i - r < 0) add_u_range(w + (i - r), w);
      if (i + r >= w) add_u_range(0, i + r - w);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  std::size_t begin(int b) const { return start_[b]; }
  std::size_t end(int b) const { return start_[b + 1]; }
  std::uint32_t id(std::size_t k) const { return ids_[k]; }

 private:
  int bu_of(double u) const { return static_cast<int>(std::floor(u / cell_)); }
  int bv_of(double v) const {
    return static_cast<int>(std::floor((v + 0.5) / cell_));
  }
  int bucket(const Splat& p) const {
    const int bu = std::clamp(bu_of(p.u), 0, nu_ - 1);
    const int bv = std::clamp(bv_of(p.v), 0, nv_ - 1);
    return bv * nu_ + bu;
  }

  const SplatSet& s_;
  double cell_;
  int nu_ = 1, nv_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::uint32_t> ids_;
};

struct Neighbor {
  double d2;
  std::uint32_t id;
  double dx, dy;
  bool operator<(const Neighbor& o) const {
    return d2 < o.d2 || (d2 == o.d2 && id < o.id);
  }
};

// Mean-value coordinates of the origin w.r.t. the polygon formed by the
// neighbors ordered by angle. Returns false when the origin is not strictly
// inside (some angular gap >= pi).
bool mean_value_weights(std::array<Neighbor, 4>& nb, int n,
                        std::array<double, 4>& w) {
  std::array<double, 4> ang;
  std::array<int, 4> order;
  for (int a = 0; a < n; ++a) {
    ang[a] = std::atan2(nb[a].dy, nb[a].dx);
    order[a] = a;
  }
  std::sort(order.begin(), order.begin() + n, [&](int a, int b) {
    return ang[a] < ang[b] || (ang[a] == ang[b] && nb[a].id < nb[b].id);
  });
  std::array<double, 4> gap;
  for (int a = 0; a < n; ++a) {
    const double next = a + 1 < n ? ang[order[a + 1]]
                                  : ang[order[0]] + 2 * std::numbers::pi;
    gap[a] = next - ang[order[a]];
    if (gap[a] >= std::numbers::pi) return false;
  }
  for (int a = 0; a < n; ++a) {
    const double prev = gap[(a + n - 1) % n];
    w[order[a]] = (std::tan(0.5 * prev) + std::tan(0.5 * gap[a])) /
                  std::sqrt(nb[order[a]].d2);
  }
  return true;
}

void interpolate_row(const SplatSet& s, const SplatGrid& grid, double r_max,
                     int j, Image& out) {
  const int w = s.width;
  const double r2 = r_max * r_max;
  std::vector<int> buckets;
  for (int i = 0; i < w; ++i) {
    std::array<Neighbor, 4> nb;
    int n = 0;
    grid.buckets_near(i, j, r_max, buckets);
    for (int b : buckets) {
      for (std::size_t k = grid.begin(b); k < grid.end(b); ++k) {
        const std::uint32_t id = grid.id(k);
        const Splat& p = s.splats[id];
        double dx = p.u - i;
        if (dx > 0.5 * w) dx -= w;
        if (dx < -0.5 * w) dx += w;
        const double dy = p.v - j;
        const double d2 = dx * dx + dy * dy;
        if (d2 > r2) continue;
        const Neighbor cand{d2, id, dx, dy};
        if (n < 4) {
          nb[n++] = cand;
          std::sort(nb.begin(), nb.begin() + n);
        } else if (cand < nb[3]) {
          nb[3] = cand;
          std::sort(nb.begin(), nb.end());
        }
      }
    }
    if (n == 0) {
      out.set_valid(i, j, false);
      continue;
    }
    out.set_valid(i, j, true);
    if (nb[0].d2 < kCoincident * kCoincident) {
      const auto& c = s.splats[nb[0].id].rgb;
      for (int ch = 0; ch < 3; ++ch) out.at(i, j, ch) = c[ch];
      continue;
    }
    std::array<double, 4> wt{};
    if (n < 3 || !mean_value_weights(nb, n, wt)) {
      for (int a = 0; a < n; ++a) wt[a] = 1.0 / std::sqrt(nb[a].d2);
    }
    double sum = 0;
    for (int a = 0; a < n; ++a) sum += wt[a];
    for (int ch = 0; ch < 3; ++ch) {
      double acc = 0;
      for (int a = 0; a < n; ++a) acc += wt[a] * s.splats[nb[a].id].rgb[ch];
      out.at(i, j, ch) = static_cast<float>(acc / sum);
    }
  }
}

}  // namespace

Image interpolate_view(const SplatSet& splats, int width, int height,
                       double r_max, Execution exec) {
  if (splats.width != width || splats.height != height) {
    throw ShapeError("splat image size mismatch");
  }
  if (!(r_max > 0)) throw InvalidArgumentError("r_max must be > 0");
  Image out(width, height, 3, 0.0f, false);
  if (splats.splats.empty()) return out;
  const SplatGrid grid(splats, r_max);
  if (exec == Execution::kSerial) {
    for (int j = 0; j < height; ++j) interpolate_row(splats, grid, r_max, j, out);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (int j = 0; j < height; ++j) interpolate_row(splats, grid, r_max, j, out);
  }
  return out;
}

Image aggregate(const std::vector<Image>& images,
                const std::vector<Image>& weights) {
  if (images.empty()) throw InvalidArgumentError("no views to aggregate");
  if (weights.size() != images.size()) {
    throw ShapeError("weight count does not match view count");
  }
  const int w = images[0].width(), h = images[0].height();
  const int ch = images[0].channels();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(images[0]) || weights[i].width() != w ||
        weights[i].height() != h) {
      throw ShapeError("aggregate inputs differ in size");
    }
  }
  Image out(w, h, ch, 0.0f, false);
  std::vector<double> acc(ch);
  std::vector<float> lo(ch), hi(ch);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double sum = 0;
      int valid = 0, last = -1;
      for (std::size_t i = 0; i < images.size(); ++i) {
        if (!images[i].valid(u, v)) continue;
        sum += weights[i].at(u, v);
        ++valid;
        last = static_cast<int>(i);
      }
      if (valid == 0) continue;
      out.set_valid(u, v, true);
      if (valid == 1) {
        for (int c = 0; c < ch; ++c) out.at(u, v, c) = images[last].at(u, v, c);
        continue;
      }
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(lo.begin(), lo.end(), std::numeric_limits<float>::infinity());
      std::fill(hi.begin(), hi.end(), -std::numeric_limits<float>::infinity());
      for (std::size_t i = 0; i < images.size(); ++i) {
        if (!images[i].valid(u, v)) continue;
        const double wi = sum > 0 ? weights[i].at(u, v) / sum : 1.0 / valid;
        for (int c = 0; c < ch; ++c) {
          const float x = images[i].at(u, v, c);
          acc[c] += wi * x;
          lo[c] = std::min(lo[c], x);
          hi[c] = std::max(hi[c], x);
        }
      }
      // Clamp to the inputs' hull so identical views reproduce exactly.
      for (int c = 0; c < ch; ++c) {
        out.at(u, v, c) = std::clamp(static_cast<float>(acc[c]), lo[c], hi[c]);
      }
    }
  }
  return out;
}

double RenderOutput::disocclusion_fraction() const {
  if (image.empty()) return 0.0;
  return 1.0 - static_cast<double>(image.valid_count()) / image.pixel_count();
}

RenderOutput render_view(const geom::PanoramaDataset& dataset,
                         const mesh::TriangleMesh& mesh, const mesh::Bvh& bvh,
                         const geom::Pose6D& target, const RenderConfig& cfg,
                         Execution exec) {
  cfg.validate();
  const Image depth = mesh::render_equirect(mesh, bvh, target, cfg.width,
                                            cfg.height, mesh::Modality::kDepth,
                                            exec);
  return render_view(dataset, depth, target, cfg, exec);
}

RenderOutput render_view(const geom::PanoramaDataset& dataset,
                         const Image& target_depth, const geom::Pose6D& target,
                         const RenderConfig& cfg, Execution exec) {
  cfg.validate();
  RenderOutput out;
  out.views = select_source_views(dataset, target, cfg.k);
  const std::size_t k = out.views.size();
  std::vector<Image> images(k), densities(k);
  std::vector<const Image*> masks(k);
  for (std::size_t i = 0; i < k; ++i) {
    const SplatSet raw = reproject_view(dataset.by_id(out.views[i]), target,
                                        cfg.width, cfg.height);
    const SplatSet kept = depth_filter(raw, target_depth, cfg.depth_eps);
    out.splats_total += raw.size();
    out.splats_kept += kept.size();
    densities[i] = density_map(kept, cfg.kde_bandwidth, exec);
    images[i] = interpolate_view(kept, cfg.width, cfg.height, cfg.r_max, exec);
    masks[i] = &images[i];
  }
  const std::vector<Image> weights =
      view_weights(densities, cfg.lambda_d, masks);
  out.image = aggregate(images, weights);
  return out;
}

}  // namespace ibrsim::ibr
