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
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "ibrsim/common/bytes.hpp"
#include "ibrsim/common/error.hpp"
#include "ibrsim/common/rng.hpp"
#include "ibrsim/nn/filler.hpp"
#include "ibrsim/nn/loss.hpp"
#include "ibrsim/nn/ops.hpp"
#include "ibrsim/nn/train.hpp"
#include "support/fd.hpp"

namespace ibrsim::nn {
namespace {

using namespace fd;

struct ConvCase {
  const char* name;
  ConvGeom g;
  bool bias;
};

class ConvGradient : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvGradient, MatchesFiniteDifferences) {
  const ConvCase& cc = GetParam();
  const ConvGeom& g = cc.g;
  Tensor4<double> x = random_tensor(1, g.in_c, 8, 8, 1);
  std::vector<double> w = random_vec(g.weight_count(), 2);
  std::vector<double> b = cc.bias ? random_vec(g.out_c, 3) : std::vector<double>{};
  const Tensor4<double> y0 = conv_forward(x, w, b, g);
  const Tensor4<double> r = random_tensor(y0.n, y0.c, y0.h, y0.w, 4);
  const auto loss = [&] { return dot(conv_forward(x, w, b, g), r); };
  const ConvGrads<double> gr = conv_backward(x, w, cc.bias, r, g);
  EXPECT_LT(fd_check(x.data, gr.dx.data, loss), kFdTolerance);
  EXPECT_LT(fd_check(w, gr.dw, loss), kFdTolerance);
  if (cc.bias) {
    EXPECT_LT(fd_check(b, gr.db, loss), kFdTolerance);
  }
}

TEST_P(ConvGradient, GemmPathMatchesDirectLoops) {
  const ConvGeom& g = GetParam().g;
  const Tensor4<double> x = random_tensor(2, g.in_c, 8, 8, 5);
  const std::vector<double> w = random_vec(g.weight_count(), 6);
  const std::vector<double> b = GetParam().bias ? random_vec(g.out_c, 7) : std::vector<double>{};
  const Tensor4<double> a = conv_forward(x, w, b, g);
  const Tensor4<double> ref = conv_forward_reference(x, w, b, g);
  ASSERT_TRUE(a.same_shape(ref));
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a.data[i], ref.data[i], 1e-12);
  EXPECT_EQ(conv_forward(x, w, b, g, Execution::kSerial),
            conv_forward(x, w, b, g, Execution::kParallel));
}

INSTANTIATE_TEST_SUITE_P(
    Layers, ConvGradient,
    ::testing::Values(ConvCase{"conv3", {3, 4, 3, 1, 1, 1, false}, true},
                      ConvCase{"conv5s2", {3, 2, 5, 2, 2, 1, false}, false},
                      ConvCase{"dilated2", {3, 3, 3, 1, 2, 2, false}, false},
                      ConvCase{"dilated4", {3, 2, 3, 1, 4, 4, false}, true},
                      ConvCase{"deconv4s2", {3, 2, 4, 2, 1, 1, true}, false},
                      ConvCase{"deconv_bias", {3, 3, 4, 2, 1, 1, true}, true}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(Conv, OutputSizes) {
  EXPECT_EQ((ConvGeom{3, 6, 5, 1, 2, 1, false}.out_size(32)), 32);
  EXPECT_EQ((ConvGeom{6, 4, 5, 2, 2, 1, false}.out_size(32)), 16);
  EXPECT_EQ((ConvGeom{16, 16, 3, 1, 16, 16, false}.out_size(8)), 8);
  EXPECT_EQ((ConvGeom{16, 4, 4, 2, 1, 1, true}.out_size(8)), 16);
}

TEST(BatchNorm, GradientMatchesFiniteDifferences) {
  Tensor4<double> x = random_tensor(1, 3, 8, 8, 11);
  std::vector<double> gamma = random_vec(3, 12), beta = random_vec(3, 13);
  const Tensor4<double> r = random_tensor(1, 3, 8, 8, 14);
  const auto loss = [&] {
    BatchNormCache<double> c;
    return dot(batchnorm_forward_train(x, gamma, beta, c), r);
  };
  BatchNormCache<double> cache;
  batchnorm_forward_train(x, gamma, beta, cache);
  std::vector<double> dg, db;
  const Tensor4<double> dx = batchnorm_backward(r, gamma, cache, dg, db);
  EXPECT_LT(fd_check(x.data, dx.data, loss), kFdTolerance);
  EXPECT_LT(fd_check(gamma, dg, loss), kFdTolerance);
  EXPECT_LT(fd_check(beta, db, loss), kFdTolerance);
}

TEST(BatchNorm, ConstantShiftDirectionHasZeroGradient) {
  const Tensor4<double> x = random_tensor(2, 2, 4, 4, 15);
  const std::vector<double> gamma = {1.3, -0.7}, beta = {0.1, 0.2};
  BatchNormCache<double> cache;
  batchnorm_forward_train(x, gamma, beta, cache);
  std::vector<double> dg, db;
  const Tensor4<double> dx =
      batchnorm_backward(random_tensor(2, 2, 4, 4, 16), gamma, cache, dg, db);
  for (int c = 0; c < 2; ++c) {
    double s = 0;
    for (int i = 0; i < 2; ++i) {
      for (int y = 0; y < 4; ++y) for (int xx = 0; xx < 4; ++xx) s += dx.at(i, c, y, xx);
    }
    EXPECT_NEAR(s, 0.0, 1e-12);
  }
}

TEST(LeakyRelu, GradientMatchesFiniteDifferences) {
  Tensor4<double> x = random_tensor(1, 3, 8, 8, 17);
  for (double& v : x.data) v += v > 0 ? 0.01 : -0.01;  // stay off the kink
  const Tensor4<double> r = random_tensor(1, 3, 8, 8, 18);
  const auto loss = [&] { return dot(leaky_relu(x), r); };
  EXPECT_LT(fd_check(x.data, leaky_relu_backward(x, r).data, loss), kFdTolerance);
  EXPECT_EQ(leaky_relu(x).data[0], x.data[0] > 0 ? x.data[0] : 0.1 * x.data[0]);
}

TEST(Loss, IdenticalImagesGiveZero) {
  const Tensor4<double> a = random_tensor(2, 3, 32, 32, 20, 0, 1);
  const LossResult<double> r = perceptual_color_loss(a, a, LossConfig<double>{});
  EXPECT_EQ(r.value, 0.0);
  for (double g : r.grad.data) EXPECT_EQ(g, 0.0);
}

TEST(Loss, ConstantOffsetClosedForm) {
  LossConfig<double> cfg;
  cfg.gamma = 0;
  const double delta = 0.125;
  const Tensor4<double> a(1, 3, 32, 32, 0.3), b(1, 3, 32, 32, 0.3 + delta);
  EXPECT_NEAR(perceptual_color_loss(a, b, cfg).value, 4 * delta, 1e-12);
  cfg.gamma = 0.05;
  // One 32x32 tile, three channels.
  EXPECT_NEAR(perceptual_color_loss(a, b, cfg).value, 4 * delta + 0.05 * 3 * delta,
              1e-12);
}

TEST(Loss, IsSymmetric) {
  const Tensor4<double> a = random_tensor(1, 3, 16, 24, 21, 0, 1);
  const Tensor4<double> b = random_tensor(1, 3, 16, 24, 22, 0, 1);
  LossConfig<double> cfg;
  cfg.tile = 10;
  EXPECT_DOUBLE_EQ(perceptual_color_loss(a, b, cfg).value,
                   perceptual_color_loss(b, a, cfg).value);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  Tensor4<double> a = random_tensor(1, 3, 32, 32, 23, 0, 1);
  const Tensor4<double> b = random_tensor(1, 3, 32, 32, 24, 0, 1);
  LossConfig<double> cfg;
  cfg.tile = 12;  // exercises truncated tiles too
  const auto loss = [&] { return perceptual_color_loss(a, b, cfg, false).value; };
  const LossResult<double> r = perceptual_color_loss(a, b, cfg);
  EXPECT_LT(fd_check(a.data, r.grad.data, loss), kFdTolerance);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  std::vector<double> p = {1.0, -2.0}, g = {0.0, 0.0};
  AdamState s;
  for (int i = 0; i < 5; ++i) adam_step<double>({{p.data(), g.data(), 2, nullptr}}, s, 0.1);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> p = {1.0, 1.0, 1.0}, g = {3.0, -0.01, 1e-3};
  AdamState s;
  adam_step<double>({{p.data(), g.data(), 3, nullptr}}, s, 0.01);
  EXPECT_NEAR(p[0], 1.0 - 0.01, 1e-8);
  EXPECT_NEAR(p[1], 1.0 + 0.01, 1e-6);
  EXPECT_NEAR(p[2], 1.0 - 0.01, 1e-4);
}

TEST(Adam, ConvergesOnQuadratic) {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> c(5), p(5), g(5);
  for (double& x : c) x = u(rng);
  for (double& x : p) x = u(rng);
  AdamState s;
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < 5; ++i) g[i] = 2 * (p[i] - c[i]);
    adam_step<double>({{p.data(), g.data(), 5, nullptr}}, s, 0.1);
  }
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(p[i], c[i], 1e-3);
}

TEST(Adam, SkipsFrozenEntries) {
  std::vector<double> p = {1.0, 1.0}, g = {1.0, 1.0};
  const std::vector<std::uint8_t> frozen = {1, 0};
  AdamState s;
  adam_step<double>({{p.data(), g.data(), 2, frozen.data()}}, s, 0.1);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_LT(p[1], 1.0);
}

TEST(Filler, ArchitectureFollowsTable) {
  const FillerNet<float> net(FillerConfig{4, 32, 3});
  ASSERT_EQ(net.layers().size(), 18u);
  const int kernels[18] = {5, 5, 3, 5, 3, 3, 3, 3, 3, 3, 3, 3, 3, 4, 3, 4, 3, 3};
  const int outs[18] = {6, 4, 4, 16, 16, 16, 16, 16, 16, 16, 16, 16, 16, 4, 4, 6, 6, 3};
  const int dil[18] = {1, 1, 1, 1, 1, 1, 2, 4, 8, 16, 16, 1, 1, 1, 1, 1, 1, 1};
  for (int i = 0; i < 18; ++i) {
    EXPECT_EQ(net.layers()[i].geom.kernel, kernels[i]) << i;
    EXPECT_EQ(net.layers()[i].geom.out_c, outs[i]) << i;
    EXPECT_EQ(net.layers()[i].geom.dilation, dil[i]) << i;
  }
  EXPECT_EQ(FillerNet<float>::dilation_ladder(256),
            (std::vector<int>{1, 1, 2, 4, 8, 16, 32, 1, 1}));
  EXPECT_TRUE(net.layers()[13].geom.transposed);
  EXPECT_TRUE(net.layers()[15].geom.transposed);
  EXPECT_FALSE(net.layers()[17].batchnorm);
}

TEST(Filler, OutputShapeMatchesInput) {
  FillerNet<float> net;
  net.init_gaussian(1);
  const Tensor4<float> y = net.infer(Tensor4<float>(2, 3, 32, 48, 0.5f));
  EXPECT_EQ(y.n, 2);
  EXPECT_EQ(y.c, 3);
  EXPECT_EQ(y.h, 32);
  EXPECT_EQ(y.w, 48);
  EXPECT_THROW(net.infer(Tensor4<float>(1, 3, 30, 32)), ShapeError);
  EXPECT_THROW(net.infer(Tensor4<float>(1, 2, 32, 32)), ShapeError);
}

TEST(Filler, ZeroFinalLayerGivesZeroOutput) {
  FillerNet<float> net;
  net.init_gaussian(2);
  auto& last = net.layers().back();
  std::fill(last.weight.begin(), last.weight.end(), 0.0f);
  const Tensor4<float> y = net.infer(Tensor4<float>(1, 3, 16, 16, 0.0f));
  for (float v : y.data) EXPECT_EQ(v, 0.0f);
}

TEST(Filler, InferenceIsPerSample) {
  FillerNet<float> net;
  net.init_gaussian(3);
  const Tensor4<float> x = random_tensor(1, 3, 16, 16, 40, 0, 1).cast<float>();
  Tensor4<float> xx(2, 3, 16, 16);
  std::copy_n(x.data.begin(), x.size(), xx.sample(0));
  std::copy_n(x.data.begin(), x.size(), xx.sample(1));
  const Tensor4<float> y1 = net.infer(x), y2 = net.infer(xx);
  for (std::size_t i = 0; i < y1.size(); ++i) {
    EXPECT_EQ(y1.data[i], y2.data[i]);
    EXPECT_EQ(y1.data[i], y2.data[i + y1.size()]);
  }
}

TEST(Filler, BackwardWithoutForwardIsStateError) {
  FillerNet<float> net;
  EXPECT_THROW(net.backward(Tensor4<float>(1, 3, 8, 8)), StateError);
}

TEST(Filler, FrozenWeightsGetZeroGradient) {
  FillerNet<float> net;
  net.init_gaussian(4);
  net.freeze_random_half(5);
  const Tensor4<float> x = random_tensor(2, 3, 16, 16, 41, 0, 1).cast<float>();
  const Tensor4<float> y = net.forward_train(x);
  net.backward(random_tensor(y.n, y.c, y.h, y.w, 42).cast<float>());
  for (const auto& l : net.layers()) {
    EXPECT_EQ(l.frozen_count(), l.weight.size() / 2);
    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < l.weight.size(); ++j) {
      if (l.frozen[j]) EXPECT_EQ(l.d_weight[j], 0.0f);
      else nonzero += l.d_weight[j] != 0.0f;
    }
    EXPECT_GT(nonzero, 0u);
  }
}

TEST(Filler, FreezeMasksDependOnSeed) {
  FillerNet<float> a, b;
  a.freeze_random_half(1);
  b.freeze_random_half(2);
  EXPECT_NE(a.layers()[5].frozen, b.layers()[5].frozen);
  FillerNet<float> c;
  c.freeze_random_half(1);
  EXPECT_EQ(a.layers()[5].frozen, c.layers()[5].frozen);
}

TEST(Filler, FullNetworkGradientMatchesFiniteDifferences) {
  const FdSummary s = full_network_fd(50);
  EXPECT_LT(s.worst, kFdTolerance);
  EXPECT_GT(s.checked, 20000);
  EXPECT_LT(s.kinks, (s.checked + s.kinks) / 10);
  RecordProperty("fd_checked", s.checked);
  RecordProperty("fd_kinks", s.kinks);
}

TEST(Filler, WeightFileRoundTrip) {
  FillerNet<float> net(FillerConfig{5, 32, 3});
  net.init_gaussian(60);
  net.freeze_random_half(61);
  net.layers()[3].running_mean[2] = 0.25f;
  const auto path = (std::filesystem::temp_directory_path() / "ibrsim_f.net").string();
  save_filler(net, path);
  const FillerNet<float> back = load_filler(path);
  ASSERT_EQ(back.config(), net.config());
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& a = net.layers()[i];
    const auto& b = back.layers()[i];
    EXPECT_EQ(a.weight, b.weight);
    EXPECT_EQ(a.bias, b.bias);
    EXPECT_EQ(a.gamma, b.gamma);
    EXPECT_EQ(a.running_mean, b.running_mean);
    EXPECT_EQ(a.running_var, b.running_var);
    EXPECT_EQ(a.frozen, b.frozen);
  }
  const auto bytes = read_file_bytes(path);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "FILLNET1");
  std::vector<std::uint8_t> bad = bytes;
  bad[0] = 'X';
  write_file_bytes(path, bad);
  EXPECT_THROW(load_filler(path), FormatError);
  bad = bytes;
  bad.resize(bad.size() - 3);
  write_file_bytes(path, bad);
  EXPECT_THROW(load_filler(path), FormatError);
}

// Blocky checker crops with a random color pair each; smooth enough for the
// bottleneck to carry.
std::vector<Image> checker_images(int n, int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Image> out;
  for (int i = 0; i < n; ++i) {
    Image im(size, size, 3);
    const int cell = 4 + static_cast<int>(u(rng) * 8);
    const int ox = static_cast<int>(u(rng) * cell), oy = static_cast<int>(u(rng) * cell);
    float a[3], b[3];
    for (int c = 0; c < 3; ++c) {
      a[c] = static_cast<float>(0.2 + 0.6 * u(rng));
      b[c] = static_cast<float>(0.2 + 0.6 * u(rng));
    }
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const bool odd = (((x + ox) / cell) + ((y + oy) / cell)) % 2;
        for (int c = 0; c < 3; ++c) im.at(x, y, c) = odd ? a[c] : b[c];
      }
    }
    out.push_back(std::move(im));
  }
  return out;
}

// Targets are checkers; sources have a rectangular hole zeroed out and a
// darker tint, which the filler has to undo.
std::vector<ImagePair> hole_pairs(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pos(0, 20);
  std::vector<ImagePair> pairs;
  for (Image& t : checker_images(n, 32, seed + 1)) {
    Image s = t;
    for (float& v : s.data()) v *= 0.7f;
    const int x0 = pos(rng), y0 = pos(rng);
    for (int y = y0; y < y0 + 10; ++y)
      for (int x = x0; x < x0 + 10; ++x)
        for (int c = 0; c < 3; ++c) s.at(x, y, c) = 0;
    pairs.push_back({std::move(s), std::move(t)});
  }
  return pairs;
}

InitConfig quick_init(int steps) {
  InitConfig cfg;
  cfg.max_steps = steps;
  cfg.check_every = steps;
  // Loose bound so a short run returns rather than throws.
  cfg.target_residual = 10.0;
  return cfg;
}

bool same_weights(const FillerNet<float>& a, const FillerNet<float>& b) {
  for (std::size_t i = 0; i < a.layers().size(); ++i) {
    const auto& x = a.layers()[i];
    const auto& y = b.layers()[i];
    if (x.weight != y.weight || x.bias != y.bias || x.gamma != y.gamma ||
        x.beta != y.beta || x.running_mean != y.running_mean ||
        x.running_var != y.running_var) {
      return false;
    }
  }
  return true;
}

TEST(IdentityInit, FreezesExactlyHalfAndKeepsFrozenGaussians) {
  const Tensor4<float> samples = images_to_tensor(checker_images(8, 32, 1));
  FillerNet<float> net;
  stochastic_identity_init(net, 70, samples, quick_init(20));
  // The same derivation of init and mask seeds, without training.
  Rng rng(70);
  FillerNet<float> raw;
  raw.init_gaussian(rng.next());
  raw.freeze_random_half(rng.next());
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& l = net.layers()[i];
    EXPECT_EQ(l.frozen_count(), l.weight.size() / 2) << "layer " << i;
    EXPECT_EQ(l.frozen, raw.layers()[i].frozen);
    std::size_t moved = 0;
    for (std::size_t j = 0; j < l.weight.size(); ++j) {
      if (l.frozen[j]) EXPECT_EQ(l.weight[j], raw.layers()[i].weight[j]);
      else moved += l.weight[j] != raw.layers()[i].weight[j];
    }
    EXPECT_GT(moved, 0u) << "layer " << i;
  }
}

TEST(IdentityInit, SeedsGiveDifferentMasksAndSameSeedIsBitwise) {
  const Tensor4<float> samples = images_to_tensor(checker_images(8, 32, 2));
  FillerNet<float> a, b, c;
  stochastic_identity_init(a, 1, samples, quick_init(10));
  stochastic_identity_init(b, 2, samples, quick_init(10));
  stochastic_identity_init(c, 1, samples, quick_init(10));
  for (std::size_t i = 0; i < a.layers().size(); ++i) {
    EXPECT_NE(a.layers()[i].frozen, b.layers()[i].frozen) << i;
  }
  EXPECT_TRUE(same_weights(a, c));
  EXPECT_FALSE(same_weights(a, b));
}

TEST(IdentityInit, ResidualFallsAndExhaustedBudgetReportsIt) {
  const Tensor4<float> samples = images_to_tensor(checker_images(16, 32, 3));
  FillerNet<float> net;
  InitConfig cfg;
  cfg.max_steps = 300;
  cfg.check_every = 50;
  std::vector<double> seen;
  cfg.on_check = [&](int, double r) { seen.push_back(r); };
  double thrown = -1;
  try {
    stochastic_identity_init(net, 5, samples, cfg);
  } catch (const InitFailureError& e) {
    thrown = e.final_residual();
  }
  ASSERT_EQ(seen.size(), 6u);
  // 300 steps cannot reach the 0.01 contract at this size.
  EXPECT_EQ(thrown, seen.back());
  EXPECT_NEAR(identity_residual(net, samples), thrown, 1e-12);
  EXPECT_LT(seen.back(), 0.5 * seen.front());
  EXPECT_THROW(stochastic_identity_init(net, 5, Tensor4<float>(), cfg),
               InvalidArgumentError);
}

TEST(TrainFiller, LossDropsByAFifthAndIsDeterministic) {
  const auto pairs = hole_pairs(16, 10);
  const Tensor4<float> samples = images_to_tensor(checker_images(8, 32, 11));
  FillerNet<float> f;
  stochastic_identity_init(f, 12, samples, quick_init(200));
  FillerNet<float> g = f;
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.lr = 1e-3;
  const TrainHistory h = train_filler(f, pairs, cfg);
  ASSERT_EQ(h.epoch_loss.size(), 12u);
  EXPECT_LE(h.epoch_loss.back(), 0.8 * h.epoch_loss.front());
  const TrainHistory h2 = train_filler(g, pairs, cfg);
  EXPECT_EQ(h.epoch_loss, h2.epoch_loss);
  EXPECT_TRUE(same_weights(f, g));
}

TEST(TrainFiller, IdenticalPairsAreAFixedPoint) {
  std::vector<ImagePair> pairs;
  for (Image& im : checker_images(16, 32, 20)) pairs.push_back({im, im});
  const Tensor4<float> samples = images_to_tensor(checker_images(8, 32, 21));
  FillerNet<float> f;
  stochastic_identity_init(f, 22, samples, quick_init(300));
  TrainConfig cfg;
  cfg.epochs = 6;
  const TrainHistory h = train_filler(f, pairs, cfg);
  // Already trained toward f(x) = x, so there is nothing to unlearn.
  for (double l : h.epoch_loss) EXPECT_LE(l, 1.05 * h.epoch_loss.front());
}

TEST(TrainFiller, RejectsBadInput) {
  FillerNet<float> f;
  TrainConfig cfg;
  EXPECT_THROW(train_filler(f, {}, cfg), InvalidArgumentError);
  cfg.crop = 30;
  EXPECT_THROW(train_filler(f, hole_pairs(2, 1), cfg), InvalidArgumentError);
  cfg.crop = 64;
  EXPECT_THROW(train_filler(f, hole_pairs(2, 1), cfg), ShapeError);
}

TEST(TrainJoint, ZeroRateWithTwinNetworksAddsNothing) {
  std::vector<ImagePair> same;
  for (Image& im : checker_images(16, 32, 30)) same.push_back({im, im});
  const Tensor4<float> samples = images_to_tensor(checker_images(8, 32, 31));
  FillerNet<float> f;
  stochastic_identity_init(f, 32, samples, quick_init(20));
  FillerNet<float> u = f, alone = f;
  const FillerNet<float> before = f;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.lr = 0;
  // With I_t = I_s and u = f the second term is D(f(I_s), f(I_s)) = 0.
  const TrainHistory joint = train_joint(f, u, same, cfg);
  const TrainHistory first = train_filler(alone, same, cfg);
  EXPECT_EQ(joint.epoch_loss, first.epoch_loss);
  for (std::size_t i = 0; i < f.layers().size(); ++i) {
    EXPECT_EQ(f.layers()[i].weight, before.layers()[i].weight);
    EXPECT_EQ(u.layers()[i].weight, before.layers()[i].weight);
  }
}

TEST(TrainJoint, SecondTermShrinks) {
  const auto pairs = hole_pairs(16, 40);
  const Tensor4<float> samples = images_to_tensor(checker_images(8, 32, 41));
  FillerNet<float> f, u;
  stochastic_identity_init(f, 42, samples, quick_init(200));
  stochastic_identity_init(u, 43, samples, quick_init(200));
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.lr = 1e-3;
  const TrainHistory h = train_joint(f, u, pairs, cfg);
  EXPECT_LT(h.epoch_loss.back(), 0.8 * h.epoch_loss.front());
}

}  // namespace
}  // namespace ibrsim::nn
