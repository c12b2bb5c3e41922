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

#include "ibrsim/nn/ops.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace ibrsim::nn {

int ConvGeom::out_size(int in) const {
  const int span = dilation * (kernel - 1) + 1;
  if (transposed) return (in - 1) * stride - 2 * pad + span;
  return (in + 2 * pad - span) / stride + 1;
}

int ConvGeom::fan_in() const {
  // A transposed kernel touches each output pixel with (k/s)^2 taps.
  if (transposed) return in_c * kernel * kernel / (stride * stride);
  return in_c * kernel * kernel;
}

namespace {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>;
template <typename T>
using CMatMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic,
                                               Eigen::Dynamic, Eigen::RowMajor>>;

// cols[(c*k + ky)*k + kx][oy*wo + ox] = img[c][oy*s - p + ky*d][ox*s - p + kx*d]
template <typename T>
void im2col(const T* img, int c, int h, int w, int ho, int wo, const ConvGeom& g,
            T* cols) {
  const int k = g.kernel;
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = cols + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) *
                            ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int y = oy * g.stride - g.pad + ky * g.dilation;
          if (y < 0 || y >= h) {
            std::fill(row + oy * wo, row + (oy + 1) * wo, T(0));
            continue;
          }
          const T* src = img + (static_cast<std::size_t>(ch) * h + y) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int x = ox * g.stride - g.pad + kx * g.dilation;
            row[oy * wo + ox] = (x >= 0 && x < w) ? src[x] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col; accumulates into img.
template <typename T>
void col2im(const T* cols, int c, int h, int w, int ho, int wo,
            const ConvGeom& g, T* img) {
  const int k = g.kernel;
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = cols + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) *
                                  ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int y = oy * g.stride - g.pad + ky * g.dilation;
          if (y < 0 || y >= h) continue;
          T* dst = img + (static_cast<std::size_t>(ch) * h + y) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int x = ox * g.stride - g.pad + kx * g.dilation;
            if (x >= 0 && x < w) dst[x] += row[oy * wo + ox];
          }
        }
      }
    }
  }
}

void check_input(int c, const ConvGeom& g, std::size_t wsize) {
  if (c != g.in_c) throw ShapeError("conv input channel mismatch");
  if (wsize != g.weight_count()) throw ShapeError("conv weight size mismatch");
}

}  // namespace

template <typename T>
Tensor4<T> conv_forward(const Tensor4<T>& x, const std::vector<T>& w,
                        const std::vector<T>& bias, const ConvGeom& g,
                        Execution exec) {
  check_input(x.c, g, w.size());
  const int ho = g.out_size(x.h), wo = g.out_size(x.w);
  if (ho <= 0 || wo <= 0) throw ShapeError("conv output would be empty");
  Tensor4<T> out(x.n, g.out_c, ho, wo);
  const int kk = g.kernel * g.kernel;
  const auto run = [&](int i) {
    if (!g.transposed) {
      std::vector<T> cols(static_cast<std::size_t>(g.in_c) * kk * ho * wo);
      im2col(x.sample(i), x.c, x.h, x.w, ho, wo, g, cols.data());
      MatMap<T>(out.sample(i), g.out_c, ho * wo).noalias() =
          CMatMap<T>(w.data(), g.out_c, g.in_c * kk) *
          CMatMap<T>(cols.data(), g.in_c * kk, ho * wo);
    } else {
      std::vector<T> cols(static_cast<std::size_t>(g.out_c) * kk * x.h * x.w);
      MatMap<T>(cols.data(), g.out_c * kk, x.h * x.w).noalias() =
          CMatMap<T>(w.data(), g.in_c, g.out_c * kk).transpose() *
          CMatMap<T>(x.sample(i), g.in_c, x.h * x.w);
      col2im(cols.data(), g.out_c, ho, wo, x.h, x.w, g, out.sample(i));
    }
    if (!bias.empty()) {
      T* o = out.sample(i);
      for (int c = 0; c < g.out_c; ++c) {
        for (std::size_t p = 0; p < out.plane(); ++p) o[c * out.plane() + p] += bias[c];
      }
    }
  };
  if (exec == Execution::kSerial || x.n == 1) {
    for (int i = 0; i < x.n; ++i) run(i);
  } else {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x.n; ++i) run(i);
  }
  return out;
}

template <typename T>
ConvGrads<T> conv_backward(const Tensor4<T>& x, const std::vector<T>& w,
                           bool has_bias, const Tensor4<T>& dout,
                           const ConvGeom& g, Execution exec) {
  check_input(x.c, g, w.size());
  const int ho = g.out_size(x.h), wo = g.out_size(x.w);
  if (dout.n != x.n || dout.c != g.out_c || dout.h != ho || dout.w != wo) {
    throw ShapeError("conv output gradient shape mismatch");
  }
  const int kk = g.kernel * g.kernel;
  ConvGrads<T> gr;
  gr.dx = Tensor4<T>(x.n, x.c, x.h, x.w);
  // Per-sample weight gradients, reduced in sample order afterwards.
  std::vector<std::vector<T>> dw(x.n, std::vector<T>(w.size(), T(0)));
  const auto run = [&](int i) {
    if (!g.transposed) {
      std::vector<T> cols(static_cast<std::size_t>(g.in_c) * kk * ho * wo);
      im2col(x.sample(i), x.c, x.h, x.w, ho, wo, g, cols.data());
      const CMatMap<T> d(dout.sample(i), g.out_c, ho * wo);
      MatMap<T>(dw[i].data(), g.out_c, g.in_c * kk).noalias() =
          d * CMatMap<T>(cols.data(), g.in_c * kk, ho * wo).transpose();
      MatMap<T>(cols.data(), g.in_c * kk, ho * wo).noalias() =
          CMatMap<T>(w.data(), g.out_c, g.in_c * kk).transpose() * d;
      col2im(cols.data(), x.c, x.h, x.w, ho, wo, g, gr.dx.sample(i));
    } else {
      std::vector<T> cols(static_cast<std::size_t>(g.out_c) * kk * x.h * x.w);
      im2col(dout.sample(i), g.out_c, ho, wo, x.h, x.w, g, cols.data());
      const CMatMap<T> c(cols.data(), g.out_c * kk, x.h * x.w);
      MatMap<T>(gr.dx.sample(i), g.in_c, x.h * x.w).noalias() =
          CMatMap<T>(w.data(), g.in_c, g.out_c * kk) * c;
      MatMap<T>(dw[i].data(), g.in_c, g.out_c * kk).noalias() =
          CMatMap<T>(x.sample(i), g.in_c, x.h * x.w) * c.transpose();
    }
  };
  if (exec == Execution::kSerial || x.n == 1) {
    for (int i = 0; i < x.n; ++i) run(i);
  } else {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x.n; ++i) run(i);
  }
  gr.dw = std::move(dw[0]);
  for (int i = 1; i < x.n; ++i) {
    for (std::size_t j = 0; j < gr.dw.size(); ++j) gr.dw[j] += dw[i][j];
  }
  if (has_bias) {
    gr.db.assign(g.out_c, T(0));
    for (int i = 0; i < x.n; ++i) {
      for (int c = 0; c < g.out_c; ++c) {
        const T* d = dout.sample(i) + c * dout.plane();
        T s = 0;
        for (std::size_t p = 0; p < dout.plane(); ++p) s += d[p];
        gr.db[c] += s;
      }
    }
  }
  return gr;
}

template <typename T>
Tensor4<T> conv_forward_reference(const Tensor4<T>& x, const std::vector<T>& w,
                                  const std::vector<T>& bias,
                                  const ConvGeom& g) {
  check_input(x.c, g, w.size());
  const int ho = g.out_size(x.h), wo = g.out_size(x.w);
  const int k = g.kernel;
  Tensor4<T> out(x.n, g.out_c, ho, wo);
  for (int i = 0; i < x.n; ++i) {
    if (!g.transposed) {
      for (int o = 0; o < g.out_c; ++o) {
        for (int oy = 0; oy < ho; ++oy) {
          for (int ox = 0; ox < wo; ++ox) {
            T acc = bias.empty() ? T(0) : bias[o];
            for (int c = 0; c < g.in_c; ++c) {
              for (int ky = 0; ky < k; ++ky) {
                const int y = oy * g.stride - g.pad + ky * g.dilation;
                if (y < 0 || y >= x.h) continue;
                for (int kx = 0; kx < k; ++kx) {
                  const int xx = ox * g.stride - g.pad + kx * g.dilation;
                  if (xx < 0 || xx >= x.w) continue;
                  acc += w[((o * g.in_c + c) * k + ky) * k + kx] *
                         x.at(i, c, y, xx);
                }
              }
            }
            out.at(i, o, oy, ox) = acc;
          }
        }
      }
    } else {
      for (int o = 0; o < g.out_c; ++o) {
        for (int oy = 0; oy < ho; ++oy) {
          for (int ox = 0; ox < wo; ++ox) {
            out.at(i, o, oy, ox) = bias.empty() ? T(0) : bias[o];
          }
        }
      }
      for (int c = 0; c < g.in_c; ++c) {
        for (int iy = 0; iy < x.h; ++iy) {
          for (int ix = 0; ix < x.w; ++ix) {
            for (int o = 0; o < g.out_c; ++o) {
              for (int ky = 0; ky < k; ++ky) {
                const int y = iy * g.stride - g.pad + ky * g.dilation;
                if (y < 0 || y >= ho) continue;
                for (int kx = 0; kx < k; ++kx) {
                  const int xx = ix * g.stride - g.pad + kx * g.dilation;
                  if (xx < 0 || xx >= wo) continue;
                  out.at(i, o, y, xx) +=
                      w[((c * g.out_c + o) * k + ky) * k + kx] *
                      x.at(i, c, iy, ix);
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor4<T> batchnorm_forward_train(const Tensor4<T>& x,
                                   const std::vector<T>& gamma,
                                   const std::vector<T>& beta,
                                   BatchNormCache<T>& cache,
                                   std::vector<double>* batch_mean,
                                   std::vector<double>* batch_var) {
  if (gamma.size() != static_cast<std::size_t>(x.c) || beta.size() != gamma.size()) {
    throw ShapeError("batchnorm parameter size mismatch");
  }
  Tensor4<T> out(x.n, x.c, x.h, x.w);
  cache.xhat = Tensor4<T>(x.n, x.c, x.h, x.w);
  cache.inv_std.assign(x.c, 0.0);
  if (batch_mean) batch_mean->assign(x.c, 0.0);
  if (batch_var) batch_var->assign(x.c, 0.0);
  const std::size_t plane = x.plane();
  const double count = static_cast<double>(x.n) * plane;
  for (int c = 0; c < x.c; ++c) {
    double sum = 0;
    for (int i = 0; i < x.n; ++i) {
      const T* p = x.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) sum += p[j];
    }
    const double mean = sum / count;
    double sq = 0;
    for (int i = 0; i < x.n; ++i) {
      const T* p = x.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        const double d = p[j] - mean;
        sq += d * d;
      }
    }
    const double var = sq / count;
    const double inv = 1.0 / std::sqrt(var + kBnEps);
    cache.inv_std[c] = inv;
    if (batch_mean) (*batch_mean)[c] = mean;
    if (batch_var) (*batch_var)[c] = var;
    for (int i = 0; i < x.n; ++i) {
      const T* p = x.sample(i) + c * plane;
      T* xh = cache.xhat.sample(i) + c * plane;
      T* o = out.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        xh[j] = static_cast<T>((p[j] - mean) * inv);
        o[j] = gamma[c] * xh[j] + beta[c];
      }
    }
  }
  return out;
}

template <typename T>
Tensor4<T> batchnorm_forward_infer(const Tensor4<T>& x,
                                   const std::vector<T>& gamma,
                                   const std::vector<T>& beta,
                                   const std::vector<T>& running_mean,
                                   const std::vector<T>& running_var) {
  Tensor4<T> out(x.n, x.c, x.h, x.w);
  const std::size_t plane = x.plane();
  for (int c = 0; c < x.c; ++c) {
    const double inv = 1.0 / std::sqrt(double(running_var[c]) + kBnEps);
    const T scale = static_cast<T>(gamma[c] * inv);
    const T shift = static_cast<T>(beta[c] - gamma[c] * running_mean[c] * inv);
    for (int i = 0; i < x.n; ++i) {
      const T* p = x.sample(i) + c * plane;
      T* o = out.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) o[j] = scale * p[j] + shift;
    }
  }
  return out;
}

template <typename T>
Tensor4<T> batchnorm_backward(const Tensor4<T>& dout,
                              const std::vector<T>& gamma,
                              const BatchNormCache<T>& cache,
                              std::vector<T>& dgamma, std::vector<T>& dbeta) {
  const Tensor4<T>& xh = cache.xhat;
  if (!dout.same_shape(xh)) throw ShapeError("batchnorm gradient shape mismatch");
  Tensor4<T> dx(dout.n, dout.c, dout.h, dout.w);
  dgamma.assign(dout.c, T(0));
  dbeta.assign(dout.c, T(0));
  const std::size_t plane = dout.plane();
  const double count = static_cast<double>(dout.n) * plane;
  for (int c = 0; c < dout.c; ++c) {
    double sd = 0, sdx = 0;
    for (int i = 0; i < dout.n; ++i) {
      const T* d = dout.sample(i) + c * plane;
      const T* h = xh.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        sd += d[j];
        sdx += double(d[j]) * h[j];
      }
    }
    dgamma[c] = static_cast<T>(sdx);
    dbeta[c] = static_cast<T>(sd);
    const double k = gamma[c] * cache.inv_std[c] / count;
    for (int i = 0; i < dout.n; ++i) {
      const T* d = dout.sample(i) + c * plane;
      const T* h = xh.sample(i) + c * plane;
      T* o = dx.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        o[j] = static_cast<T>(k * (count * d[j] - sd - h[j] * sdx));
      }
    }
  }
  return dx;
}

template <typename T>
Tensor4<T> leaky_relu(const Tensor4<T>& x) {
  Tensor4<T> out = x;
  for (T& v : out.data) v = v > 0 ? v : static_cast<T>(kLeakySlope) * v;
  return out;
}

template <typename T>
Tensor4<T> leaky_relu_backward(const Tensor4<T>& x, const Tensor4<T>& dout) {
  Tensor4<T> dx = dout;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(x.data[i] > 0)) dx.data[i] *= static_cast<T>(kLeakySlope);
  }
  return dx;
}

#define IBRSIM_INSTANTIATE_OPS(T)                                             \
  template Tensor4<T> conv_forward(const Tensor4<T>&, const std::vector<T>&,  \
                                   const std::vector<T>&, const ConvGeom&,    \
                                   Execution);                                \
  template ConvGrads<T> conv_backward(const Tensor4<T>&,                      \
                                      const std::vector<T>&, bool,            \
                                      const Tensor4<T>&, const ConvGeom&,     \
                                      Execution);                             \
  template Tensor4<T> conv_forward_reference(                                 \
      const Tensor4<T>&, const std::vector<T>&, const std::vector<T>&,        \
      const ConvGeom&);                                                       \
  template Tensor4<T> batchnorm_forward_train(                                \
      const Tensor4<T>&, const std::vector<T>&, const std::vector<T>&,        \
      BatchNormCache<T>&, std::vector<double>*, std::vector<double>*);        \
  template Tensor4<T> batchnorm_forward_infer(                                \
      const Tensor4<T>&, const std::vector<T>&, const std::vector<T>&,        \
      const std::vector<T>&, const std::vector<T>&);                          \
  template Tensor4<T> batchnorm_backward(const Tensor4<T>&,                   \
                                         const std::vector<T>&,               \
                                         const BatchNormCache<T>&,            \
                                         std::vector<T>&, std::vector<T>&);   \
  template Tensor4<T> leaky_relu(const Tensor4<T>&);                          \
  template Tensor4<T> leaky_relu_backward(const Tensor4<T>&, const Tensor4<T>&);

IBRSIM_INSTANTIATE_OPS(float)
IBRSIM_INSTANTIATE_OPS(double)

}  // namespace ibrsim::nn
