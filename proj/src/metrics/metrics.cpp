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


#include "ibrsim/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ibrsim/common/error.hpp"
#include "ibrsim/nn/train.hpp"

namespace ibrsim::metrics {

double l1(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("l1: shape mismatch");
  if (a.data().empty()) throw ShapeError("l1: empty image");
  double s = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    s += std::abs(double(a.data()[i]) - b.data()[i]);
  }
  return s / static_cast<double>(a.data().size());
}

namespace {

std::vector<double> gaussian_taps(int n, double sigma) {
  std::vector<double> g(n);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    const double x = i - (n - 1) / 2.0;
    g[i] = std::exp(-x * x / (2 * sigma * sigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable valid-mode filter of a row-major w x h plane.
std::vector<double> filter_valid(const std::vector<double>& p, int w, int h,
                                 const std::vector<double>& g) {
  const int n = static_cast<int>(g.size());
  const int ow = w - n + 1, oh = h - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += g[i] * p[y * w + x + i];
      rows[y * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += g[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimConfig& cfg) {
  if (!a.same_shape(b)) throw ShapeError("ssim: shape mismatch");
  const int w = a.width(), h = a.height(), n = cfg.window;
  if (n < 1 || w < n || h < n) throw ShapeError("ssim: image smaller than window");
  const auto g = gaussian_taps(n, cfg.sigma);
  const double c1 = std::pow(cfg.k1 * cfg.range, 2);
  const double c2 = std::pow(cfg.k2 * cfg.range, 2);
  const std::size_t np = static_cast<std::size_t>(w) * h;
  double total = 0;
  for (int c = 0; c < a.channels(); ++c) {
    std::vector<double> x(np), y(np), xx(np), yy(np), xy(np);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const std::size_t i = static_cast<std::size_t>(v) * w + u;
        x[i] = a.at(u, v, c);
        y[i] = b.at(u, v, c);
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
      }
    }
    const auto mx = filter_valid(x, w, h, g), my = filter_valid(y, w, h, g);
    const auto sxx = filter_valid(xx, w, h, g), syy = filter_valid(yy, w, h, g),
               sxy = filter_valid(xy, w, h, g);
    double sum = 0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cxy = sxy[i] - mx[i] * my[i];
      sum += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / a.channels();
}

FeatureSet extract_features(const std::vector<Image>& images,
                            const nn::FeatureExtractor<float>& extractor) {
  if (images.empty()) throw InvalidArgumentError("no images");
  const auto levels = extractor.features(nn::images_to_tensor(images));
  const auto& last = levels.back();
  FeatureSet f(last.n, static_cast<Eigen::Index>(last.sample_size()));
  for (int i = 0; i < last.n; ++i) {
    const float* p = last.sample(i);
    for (std::size_t j = 0; j < last.sample_size(); ++j) f(i, j) = p[j];
  }
  return f;
}

FeatureSet extract_features(const std::vector<Image>& images) {
  return extract_features(images, nn::PixelPyramid<float>());
}

namespace {

void check_pair(const FeatureSet& x, const FeatureSet& y, const char* what) {
  if (x.cols() != y.cols()) {
    throw ShapeError(std::string(what) + ": feature dimensions differ");
  }
  if (x.rows() < 2 || y.rows() < 2) {
    throw InvalidArgumentError(std::string(what) + ": needs at least 2 samples per set");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw InvalidArgumentError(std::string(what) + ": non-finite features");
  }
}

}  // namespace

double mmd2_unbiased(const FeatureSet& x, const FeatureSet& y) {
  check_pair(x, y, "mmd");
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
  const Eigen::VectorXd sx = x.colwise().sum().transpose();
  const Eigen::VectorXd sy = y.colwise().sum().transpose();
  const double qx = x.squaredNorm(), qy = y.squaredNorm();
  const double kxx = sx.squaredNorm() - qx;  // sum over i != j
  const double kyy = sy.squaredNorm() - qy;
  if (x.rows() == y.rows()) {
    // U-statistic over paired samples z_i = (x_i, y_i):
    // h(z_i, z_j) = k(x_i, x_j) + k(y_i, y_j) - k(x_i, y_j) - k(x_j, y_i).
    const double kxy = sx.dot(sy) - (x.array() * y.array()).sum();
    return (kxx + kyy - 2 * kxy) / (n * (n - 1));
  }
  return kxx / (n * (n - 1)) + kyy / (m * (m - 1)) - 2 * sx.dot(sy) / (n * m);
}

double mmd2_biased(const FeatureSet& x, const FeatureSet& y) {
  if (x.cols() != y.cols()) throw ShapeError("mmd: feature dimensions differ");
  if (x.rows() < 1 || y.rows() < 1) throw InvalidArgumentError("mmd: empty set");
  return (x.colwise().mean() - y.colwise().mean()).squaredNorm();
}

Eigen::MatrixXd covariance(const FeatureSet& x) {
  if (x.rows() < 2) throw InvalidArgumentError("covariance: needs 2 samples");
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}

double coral(const FeatureSet& x, const FeatureSet& y) {
  check_pair(x, y, "coral");
  const double d = static_cast<double>(x.cols());
  return (covariance(x) - covariance(y)).squaredNorm() / (4 * d * d);
}

double retrieval_topk(const FeatureSet& queries, const FeatureSet& pool, int k) {
  if (pool.rows() == 0) throw InvalidArgumentError("retrieval: empty pool");
  if (queries.rows() > pool.rows()) {
    throw InvalidArgumentError("retrieval: more queries than pool items");
  }
  if (queries.cols() != pool.cols()) throw ShapeError("retrieval: dimensions differ");
  if (k < 1) throw InvalidArgumentError("retrieval: k must be positive");
  int hits = 0;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Eigen::VectorXd d =
        (pool.rowwise() - queries.row(i)).rowwise().squaredNorm();
    int rank = 0;
    for (Eigen::Index j = 0; j < pool.rows(); ++j) {
      if (d[j] < d[i] || (d[j] == d[i] && j < i)) ++rank;
    }
    hits += rank < k;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.rows());
}

double class_entropy(const std::vector<std::int64_t>& labels) {
  if (labels.empty()) throw InvalidArgumentError("class_entropy: no labels");
  std::map<std::int64_t, std::size_t> counts;
  for (auto l : labels) ++counts[l];
  const double n = static_cast<double>(labels.size());
  double h = 0;
  for (const auto& [label, c] : counts) {
    const double p = c / n;
    h -= p * std::log2(p);
  }
  return h + 0.0;
}

}  // namespace ibrsim::metrics
