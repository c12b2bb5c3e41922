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
#include <vector>

#include <Eigen/Dense>

#include "ibrsim/common/image.hpp"
#include "ibrsim/nn/loss.hpp"

namespace ibrsim::metrics {

// Mean absolute difference over all pixels and channels.
double l1(const Image& a, const Image& b);

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double range = 1.0;
};

// Mean local SSIM per channel, averaged over channels. Windows are the
// "valid" placements only; images must be at least window x window.
double ssim(const Image& a, const Image& b, const SsimConfig& cfg = {});

// N x D, one feature vector per row.
using FeatureSet = Eigen::MatrixXd;

// Flattened last extractor level of every image.
FeatureSet extract_features(const std::vector<Image>& images,
                            const nn::FeatureExtractor<float>& extractor);
FeatureSet extract_features(const std::vector<Image>& images);

// Unbiased MMD^2 under k(x, y) = x'y; can be negative. Needs N >= 2 on both
// sides.
double mmd2_unbiased(const FeatureSet& x, const FeatureSet& y);
// Biased (V-statistic) MMD^2 = |mean(x) - mean(y)|^2.
double mmd2_biased(const FeatureSet& x, const FeatureSet& y);
// Reported value: unbiased estimate clamped at zero.
inline double mmd2_report(const FeatureSet& x, const FeatureSet& y) {
  const double v = mmd2_unbiased(x, y);
  return v > 0 ? v : 0.0;
}

// Sample covariance (N - 1 denominator).
Eigen::MatrixXd covariance(const FeatureSet& x);
// |cov(x) - cov(y)|_F^2 / (4 D^2).
double coral(const FeatureSet& x, const FeatureSet& y);

// Fraction of queries i whose pool item i is among the k nearest pool items
// by Euclidean distance, ties broken by lower index.
double retrieval_topk(const FeatureSet& queries, const FeatureSet& pool, int k);

// Shannon entropy in bits of the empirical label distribution.
double class_entropy(const std::vector<std::int64_t>& labels);

}  // namespace ibrsim::metrics
