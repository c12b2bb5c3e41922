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


#include <cmath>

#include <gtest/gtest.h>

#include "ibrsim/common/error.hpp"
#include "ibrsim/common/rng.hpp"
#include "ibrsim/metrics/bench.hpp"
#include "ibrsim/metrics/metrics.hpp"
#include "ibrsim/synth/scene.hpp"

namespace ibrsim::metrics {
namespace {

Image random_image(int w, int h, int c, std::uint64_t seed) {
  Rng rng(seed);
  Image im(w, h, c);
  for (float& v : im.data()) v = static_cast<float>(rng.uniform());
  return im;
}

FeatureSet random_features(int n, int d, std::uint64_t seed, double shift = 0,
                           double scale = 1) {
  Rng rng(seed);
  FeatureSet f(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) f(i, j) = shift + scale * rng.normal();
  }
  return f;
}

TEST(L1, IdentityAndComplement) {
  const Image a = random_image(9, 7, 3, 1);
  EXPECT_EQ(l1(a, a), 0.0);
  Image bin(6, 4, 1), inv(6, 4, 1);
  for (std::size_t i = 0; i < bin.data().size(); ++i) {
    bin.data()[i] = static_cast<float>(i % 3 == 0);
    inv.data()[i] = 1.0f - bin.data()[i];
  }
  EXPECT_EQ(l1(bin, inv), 1.0);
  EXPECT_THROW(l1(a, Image(9, 7, 1)), ShapeError);
}

// Direct 2-D weighted window statistics per placement.
double ssim_reference(const Image& a, const Image& b) {
  const int n = 11;
  double g[n][n], gs = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      g[i][j] = std::exp(-((i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0)) / (2 * 1.5 * 1.5));
      gs += g[i][j];
    }
  }
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0;
  for (int c = 0; c < a.channels(); ++c) {
    double sum = 0;
    int count = 0;
    for (int y0 = 0; y0 + n <= a.height(); ++y0) {
      for (int x0 = 0; x0 + n <= a.width(); ++x0) {
        double mx = 0, my = 0;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            mx += g[i][j] / gs * a.at(x0 + j, y0 + i, c);
            my += g[i][j] / gs * b.at(x0 + j, y0 + i, c);
          }
        }
        double vx = 0, vy = 0, cxy = 0;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const double dx = a.at(x0 + j, y0 + i, c) - mx;
            const double dy = b.at(x0 + j, y0 + i, c) - my;
            vx += g[i][j] / gs * dx * dx;
            vy += g[i][j] / gs * dy * dy;
            cxy += g[i][j] / gs * dx * dy;
          }
        }
        sum += (2 * mx * my + c1) * (2 * cxy + c2) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    }
    total += sum / count;
  }
  return total / a.channels();
}

TEST(Ssim, IdenticalImagesGiveOne) {
  const Image a = random_image(16, 12, 3, 2);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, MatchesDirectWindowedReference) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Image a = random_image(20, 17, 3, 10 + s);
    Image b = a;
    Rng rng(s);
    for (float& v : b.data()) v = std::clamp(v + 0.2f * static_cast<float>(rng.normal()), 0.0f, 1.0f);
    EXPECT_NEAR(ssim(a, b), ssim_reference(a, b), 1e-6);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
  }
}

TEST(Ssim, DropsWithNoiseAndRejectsSmallImages) {
  const Image a = random_image(32, 32, 1, 3);
  Image b = a;
  Rng rng(4);
  double prev = 1.0;
  for (double sigma : {0.05, 0.1, 0.2, 0.4}) {
    for (std::size_t i = 0; i < b.data().size(); ++i) {
      b.data()[i] = static_cast<float>(a.data()[i] + sigma * rng.normal());
    }
    const double s = ssim(a, b);
    EXPECT_LT(s, prev);
    prev = s;
  }
  EXPECT_THROW(ssim(Image(10, 20, 1), Image(10, 20, 1)), ShapeError);
}

double mmd2_brute(const FeatureSet& x, const FeatureSet& y) {
  const auto k = [](const auto& a, const auto& b) { return a.dot(b); };
  const Eigen::Index n = x.rows(), m = y.rows();
  double kxx = 0, kyy = 0, kxy = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) kxx += k(x.row(i), x.row(j));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (i != j) kyy += k(y.row(i), y.row(j));
  if (n == m) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) kxy += k(x.row(i), y.row(j)) + k(x.row(j), y.row(i));
    return (kxx + kyy - kxy) / double(n * (n - 1));
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) kxy += k(x.row(i), y.row(j));
  return kxx / double(n * (n - 1)) + kyy / double(m * (m - 1)) - 2 * kxy / double(n * m);
}

TEST(Mmd, SameSampleIsZero) {
  const FeatureSet x = random_features(40, 6, 1, 0.3);
  EXPECT_NEAR(mmd2_unbiased(x, x), 0.0, 1e-12);
  EXPECT_NEAR(mmd2_biased(x, x), 0.0, 1e-12);
}

TEST(Mmd, MatchesBruteForceKernelSums) {
  for (int m : {30, 23}) {
    const FeatureSet x = random_features(30, 5, 2, 0.0);
    const FeatureSet y = random_features(m, 5, 3, 0.4, 1.3);
    EXPECT_NEAR(mmd2_unbiased(x, y), mmd2_brute(x, y), 1e-10);
  }
}

TEST(Mmd, ConvergesToSquaredMeanGap) {
  const double delta = 0.5;
  const FeatureSet x = random_features(20000, 1, 4, 0.0);
  const FeatureSet y = random_features(20000, 1, 5, delta);
  // Standard error of the estimate is about 2 delta sqrt(2 / N) = 0.01.
  EXPECT_NEAR(mmd2_unbiased(x, y), delta * delta, 0.04);
}

TEST(Mmd, UnbiasedAcrossTrialsWhileBiasedIsOffBySampleVariance) {
  // Small unequal samples; averaged over trials the unbiased estimator hits
  // delta^2 while the V-statistic sits at delta^2 + sigma^2 (1/n + 1/m).
  const double delta = 0.7;
  const int n = 5, m = 7, trials = 20000;
  double u = 0, b = 0;
  for (int t = 0; t < trials; ++t) {
    const FeatureSet x = random_features(n, 1, 100 + 2 * t, 0.0);
    const FeatureSet y = random_features(m, 1, 101 + 2 * t, delta);
    u += mmd2_unbiased(x, y);
    b += mmd2_biased(x, y);
  }
  u /= trials;
  b /= trials;
  EXPECT_NEAR(u, delta * delta, 0.03);
  EXPECT_NEAR(b, delta * delta + 1.0 / n + 1.0 / m, 0.03);
}

TEST(Mmd, BiasedAndUnbiasedAgreeToOrderOneOverN) {
  const int n = 1000;
  const FeatureSet x = random_features(n, 4, 6, 0.0);
  const FeatureSet y = random_features(n, 4, 7, 0.2);
  // The gap is dominated by (E|x|^2 + E|y|^2) / N, about 8 / N here.
  EXPECT_LT(std::abs(mmd2_unbiased(x, y) - mmd2_biased(x, y)), 20.0 / n);
}

TEST(Mmd, SymmetricAndErrors) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const FeatureSet x = random_features(12, 3, 200 + s, 0.1);
    const FeatureSet y = random_features(12 + s % 3, 3, 300 + s, -0.2);
    EXPECT_NEAR(mmd2_unbiased(x, y), mmd2_unbiased(y, x), 1e-12);
    EXPECT_NEAR(mmd2_biased(x, y), mmd2_biased(y, x), 1e-12);
    EXPECT_GE(mmd2_report(x, y), 0.0);
  }
  EXPECT_THROW(mmd2_unbiased(random_features(1, 3, 1), random_features(5, 3, 2)),
               InvalidArgumentError);
  EXPECT_THROW(mmd2_unbiased(random_features(4, 3, 1), random_features(5, 2, 2)),
               ShapeError);
}

double coral_direct(const FeatureSet& x, const FeatureSet& y) {
  const auto cov = [](const FeatureSet& f) {
    const Eigen::Index n = f.rows(), d = f.cols();
    std::vector<double> mean(d, 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) mean[j] += f(i, j) / n;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b)
        for (Eigen::Index i = 0; i < n; ++i)
          c(a, b) += (f(i, a) - mean[a]) * (f(i, b) - mean[b]) / (n - 1);
    return c;
  };
  const Eigen::MatrixXd cx = cov(x), cy = cov(y);
  double s = 0;
  for (Eigen::Index a = 0; a < cx.rows(); ++a)
    for (Eigen::Index b = 0; b < cx.cols(); ++b) s += std::pow(cx(a, b) - cy(a, b), 2);
  const double d = static_cast<double>(x.cols());
  return s / (4 * d * d);
}

TEST(Coral, IdentityScalingAndDirectFormula) {
  FeatureSet x = random_features(50, 4, 8);
  EXPECT_EQ(coral(x, x), 0.0);
  x = x.rowwise() - x.colwise().mean();
  const FeatureSet y = 2 * x;
  const double want = (3 * covariance(x)).squaredNorm() / (4 * 16);
  EXPECT_NEAR(coral(x, y), want, 1e-12 * want);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const FeatureSet a = random_features(20, 3, 400 + s);
    const FeatureSet b = random_features(25, 3, 500 + s, 0.5, 1.5);
    EXPECT_NEAR(coral(a, b), coral_direct(a, b), 1e-10);
    EXPECT_EQ(coral(a, b), coral(b, a));
  }
}

TEST(Retrieval, ExactMatchesAndTies) {
  const FeatureSet q = random_features(10, 4, 9);
  EXPECT_EQ(retrieval_topk(q, q, 1), 1.0);
  // One-hot features, queries in shuffled order paired with their own rows.
  FeatureSet pool = FeatureSet::Identity(6, 6);
  EXPECT_EQ(retrieval_topk(pool, pool, 1), 1.0);
  // Duplicate of item 3 at index 1: the tie goes to the lower index.
  pool.row(1) = pool.row(3);
  EXPECT_NEAR(retrieval_topk(pool, pool, 1), 5.0 / 6, 1e-15);
  EXPECT_EQ(retrieval_topk(pool, pool, 2), 1.0);
  EXPECT_THROW(retrieval_topk(q, FeatureSet(0, 4), 1), InvalidArgumentError);
}

TEST(Retrieval, ShiftedPoolStillRetrieves) {
  const FeatureSet pool = random_features(50, 8, 10);
  const FeatureSet q = pool.array() + 0.01;
  EXPECT_EQ(retrieval_topk(q, pool, 1), 1.0);
  const FeatureSet noise = random_features(50, 8, 11, 0.0, 10.0);
  EXPECT_LT(retrieval_topk(noise, pool, 1), 0.2);
}

TEST(Entropy, SingleAndUniform) {
  EXPECT_EQ(class_entropy({4, 4, 4}), 0.0);
  for (int n = 0; n <= 5; ++n) {
    std::vector<std::int64_t> labels;
    for (int r = 0; r < 3; ++r)
      for (int i = 0; i < (1 << n); ++i) labels.push_back(i * 7);
    EXPECT_NEAR(class_entropy(labels), n, 1e-12);
  }
  EXPECT_NEAR(class_entropy({0, 0, 0, 1}),
              -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25)), 1e-15);
}

TEST(Features, LastPyramidLevelFlattened) {
  const std::vector<Image> ims{random_image(32, 32, 3, 1), random_image(32, 32, 3, 2)};
  const FeatureSet f = extract_features(ims);
  ASSERT_EQ(f.rows(), 2);
  ASSERT_EQ(f.cols(), 3 * 4 * 4);
  double mean = 0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) mean += ims[1].at(x, y, 0) / 64.0;
  EXPECT_NEAR(f(1, 0), mean, 1e-6);
}

std::shared_ptr<const env::Assets> bench_assets(bool filler) {
  synth::SceneSpec s;
  s.room_width = {5, 5};
  s.room_depth = {4, 4};
  auto m = synth::generate_scene(s);
  const mesh::Bvh bvh(m);
  auto ds = synth::generate_dataset(m, bvh, 0.2, 64, 32);
  std::optional<nn::FillerNet<float>> f;
  if (filler) {
    f.emplace();
    f->init_gaussian(1);
  }
  return std::make_shared<env::Assets>(std::move(m), std::move(ds), std::move(f));
}

TEST(Bench, ReportHasFullGrid) {
  BenchConfig cfg;
  cfg.resolutions = {8, 16};
  cfg.warmup = 2;
  cfg.frames = 5;
  cfg.min_seconds = 0;
  cfg.warmup_seconds = 0;
  const BenchReport r = fps_benchmark(bench_assets(true), cfg);
  ASSERT_EQ(r.rows.size(), 12u);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(r.rows[i].resolution, cfg.resolutions[i / 6]);
    EXPECT_EQ(r.rows[i].output, all_bench_outputs()[i % 6]);
    EXPECT_GE(r.rows[i].frames, 5);
    EXPECT_GT(r.rows[i].fps, 0);
  }
  EXPECT_EQ(r.n_f, 4);
  EXPECT_EQ(r.k, 4);
  const auto j = bench_to_json(r);
  EXPECT_EQ(j.at("schema_version"), kBenchSchemaVersion);
  EXPECT_EQ(j.at("rows").size(), 12u);
  EXPECT_EQ(j.at("rows")[1].at("output"), "rgbd_post");
  EXPECT_EQ(&r.row(16, BenchOutput::kDepth), &r.rows[8]);
}

TEST(Bench, PostFilterRowNeedsFiller) {
  BenchConfig cfg;
  cfg.resolutions = {8};
  cfg.outputs = {BenchOutput::kRgbdPost};
  cfg.frames = 1;
  cfg.min_seconds = 0;
  cfg.warmup_seconds = 0;
  EXPECT_THROW(fps_benchmark(bench_assets(false), cfg), StateError);
}

}  // namespace
}  // namespace ibrsim::metrics
