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

#include "ibrsim/nn/loss.hpp"

#include <cmath>

namespace ibrsim::nn {

namespace {

template <typename T>
Tensor4<T> avg_pool(const Tensor4<T>& x, int f) {
  const int ho = (x.h + f - 1) / f, wo = (x.w + f - 1) / f;
  Tensor4<T> out(x.n, x.c, ho, wo);
  for (int i = 0; i < x.n; ++i) {
    for (int c = 0; c < x.c; ++c) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          const int y1 = std::min(x.h, (oy + 1) * f), x1 = std::min(x.w, (ox + 1) * f);
          double s = 0;
          for (int y = oy * f; y < y1; ++y) {
            for (int xx = ox * f; xx < x1; ++xx) s += x.at(i, c, y, xx);
          }
          out.at(i, c, oy, ox) = static_cast<T>(s / ((y1 - oy * f) * (x1 - ox * f)));
        }
      }
    }
  }
  return out;
}

template <typename T>
void avg_pool_backward(const Tensor4<T>& g, int f, Tensor4<T>& dx) {
  for (int i = 0; i < dx.n; ++i) {
    for (int c = 0; c < dx.c; ++c) {
      for (int y = 0; y < dx.h; ++y) {
        for (int x = 0; x < dx.w; ++x) {
          const int oy = y / f, ox = x / f;
          const int y1 = std::min(dx.h, (oy + 1) * f), x1 = std::min(dx.w, (ox + 1) * f);
          dx.at(i, c, y, x) +=
              g.at(i, c, oy, ox) / static_cast<T>((y1 - oy * f) * (x1 - ox * f));
        }
      }
    }
  }
}

// |x| outside the knee, x^2/k inside: exact L1 away from zero, zero at zero
// and a defined gradient there.
inline double smooth_abs(double x, double k) {
  const double a = std::abs(x);
  return a < k ? x * x / k : a;
}
inline double smooth_abs_grad(double x, double k) {
  if (std::abs(x) < k) return 2 * x / k;
  return x > 0 ? 1.0 : -1.0;
}

}  // namespace

template <typename T>
PixelPyramid<T>::PixelPyramid(int levels) : levels_(levels) {
  if (levels < 1) throw InvalidArgumentError("pyramid needs at least one level");
}

template <typename T>
std::vector<Tensor4<T>> PixelPyramid<T>::features(const Tensor4<T>& x) const {
  std::vector<Tensor4<T>> out;
  out.push_back(x);
  for (int l = 1; l < levels_; ++l) out.push_back(avg_pool(x, 1 << l));
  return out;
}

template <typename T>
Tensor4<T> PixelPyramid<T>::backward(const Tensor4<T>& x,
                                     const std::vector<Tensor4<T>>& grads) const {
  Tensor4<T> dx = grads.at(0);
  if (!dx.same_shape(x)) throw ShapeError("pyramid gradient shape mismatch");
  for (int l = 1; l < levels_; ++l) avg_pool_backward(grads.at(l), 1 << l, dx);
  return dx;
}

template <typename T>
void LossConfig<T>::validate() const {
  if (!extractor) throw InvalidArgumentError("loss needs a feature extractor");
  if (!(gamma >= 0)) throw InvalidArgumentError("gamma must be >= 0");
  if (tile < 1) throw InvalidArgumentError("tile must be >= 1");
  if (!(smooth > 0)) throw InvalidArgumentError("smooth must be > 0");
}

template <typename T>
LossResult<T> perceptual_color_loss(const Tensor4<T>& i1, const Tensor4<T>& i2,
                                    const LossConfig<T>& cfg, bool want_grad) {
  cfg.validate();
  if (!i1.same_shape(i2)) throw ShapeError("loss inputs differ in shape");
  LossResult<T> r;
  const double inv_n = 1.0 / i1.n;
  const auto f1 = cfg.extractor->features(i1);
  const auto f2 = cfg.extractor->features(i2);
  std::vector<Tensor4<T>> g;
  double total = 0;
  for (std::size_t l = 0; l < f1.size(); ++l) {
    const double lambda = 1.0 / f1[l].sample_size();
    if (want_grad) g.emplace_back(f1[l].n, f1[l].c, f1[l].h, f1[l].w);
    for (std::size_t j = 0; j < f1[l].size(); ++j) {
      const double d = double(f1[l].data[j]) - f2[l].data[j];
      total += lambda * smooth_abs(d, cfg.smooth);
      if (want_grad) {
        g[l].data[j] = static_cast<T>(inv_n * lambda * smooth_abs_grad(d, cfg.smooth));
      }
    }
  }
  if (want_grad) r.grad = cfg.extractor->backward(i1, g);
  if (cfg.gamma > 0) {
    const int t = cfg.tile;
    for (int i = 0; i < i1.n; ++i) {
      for (int ty = 0; ty < i1.h; ty += t) {
        for (int tx = 0; tx < i1.w; tx += t) {
          const int y1 = std::min(i1.h, ty + t), x1 = std::min(i1.w, tx + t);
          const double area = double(y1 - ty) * (x1 - tx);
          for (int c = 0; c < i1.c; ++c) {
            double m1 = 0, m2 = 0;
            for (int y = ty; y < y1; ++y) {
              for (int x = tx; x < x1; ++x) {
                m1 += i1.at(i, c, y, x);
                m2 += i2.at(i, c, y, x);
              }
            }
            const double d = (m1 - m2) / area;
            total += cfg.gamma * smooth_abs(d, cfg.smooth);
            if (!want_grad) continue;
            const T gd = static_cast<T>(inv_n * cfg.gamma *
                                        smooth_abs_grad(d, cfg.smooth) / area);
            for (int y = ty; y < y1; ++y) {
              for (int x = tx; x < x1; ++x) r.grad.at(i, c, y, x) += gd;
            }
          }
        }
      }
    }
  }
  r.value = total * inv_n;
  return r;
}

template <typename T>
void adam_step(const std::vector<ParamRef<T>>& params, AdamState& s,
               double lr) {
  if (s.m.empty()) {
    for (const auto& p : params) {
      s.m.emplace_back(p.size, 0.0);
      s.v.emplace_back(p.size, 0.0);
    }
  }
  if (s.m.size() != params.size()) throw ShapeError("adam state mismatch");
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, s.step);
  const double c2 = 1.0 - std::pow(s.beta2, s.step);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const ParamRef<T>& p = params[k];
    if (s.m[k].size() != p.size) throw ShapeError("adam state mismatch");
    for (std::size_t j = 0; j < p.size; ++j) {
      if (p.frozen && p.frozen[j]) continue;
      const double g = p.grad[j];
      double& m = s.m[k][j];
      double& v = s.v[k][j];
      m = s.beta1 * m + (1 - s.beta1) * g;
      v = s.beta2 * v + (1 - s.beta2) * g * g;
      p.value[j] -= static_cast<T>(lr * (m / c1) / (std::sqrt(v / c2) + s.eps));
    }
  }
}

template class PixelPyramid<float>;
template class PixelPyramid<double>;
template struct LossConfig<float>;
template struct LossConfig<double>;
template LossResult<float> perceptual_color_loss(const Tensor4<float>&,
                                                 const Tensor4<float>&,
                                                 const LossConfig<float>&, bool);
template LossResult<double> perceptual_color_loss(const Tensor4<double>&,
                                                  const Tensor4<double>&,
                                                  const LossConfig<double>&, bool);
template void adam_step(const std::vector<ParamRef<float>>&, AdamState&, double);
template void adam_step(const std::vector<ParamRef<double>>&, AdamState&, double);

}  // namespace ibrsim::nn
