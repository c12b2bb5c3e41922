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

#include "ibrsim/nn/filler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ibrsim/common/bytes.hpp"
#include "ibrsim/common/rng.hpp"

namespace ibrsim::nn {

void FillerConfig::validate() const {
  if (n_f < 1) throw InvalidArgumentError("n_f must be >= 1");
  if (in_channels < 1) throw InvalidArgumentError("in_channels must be >= 1");
  if (design_height < 4 || design_height % 4 != 0) {
    throw InvalidArgumentError("design_height must be a positive multiple of 4");
  }
}

template <typename T>
std::size_t ConvLayer<T>::frozen_count() const {
  return static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), 1));
}

template <typename T>
std::vector<int> FillerNet<T>::dilation_ladder(int design_height) {
  const int cap = std::min(32, std::max(1, design_height / 2));
  std::vector<int> d = {1, 1, 2, 4, 8, 16, 32, 1, 1};
  for (int& x : d) x = std::min(x, cap);
  return d;
}

template <typename T>
FillerNet<T>::FillerNet(const FillerConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  const int nf = cfg.n_f;
  const auto add = [&](int in, int out, int k, int stride, int pad, int dil,
                       bool transposed, bool bn = true, bool act = true) {
    ConvLayer<T> l;
    l.geom = {in, out, k, stride, pad, dil, transposed};
    l.batchnorm = bn;
    l.activation = act;
    l.weight.assign(l.geom.weight_count(), T(0));
    l.frozen.assign(l.weight.size(), 0);
    if (bn) {
      l.gamma.assign(out, T(1));
      l.beta.assign(out, T(0));
      l.running_mean.assign(out, T(0));
      l.running_var.assign(out, T(1));
    } else {
      l.bias.assign(out, T(0));
    }
    layers_.push_back(std::move(l));
  };
  add(cfg.in_channels, 6, 5, 1, 2, 1, false);
  add(6, nf, 5, 2, 2, 1, false);
  add(nf, nf, 3, 1, 1, 1, false);
  add(nf, 4 * nf, 5, 2, 2, 1, false);
  for (int d : dilation_ladder(cfg.design_height)) {
    add(4 * nf, 4 * nf, 3, 1, d, d, false);
  }
  add(4 * nf, nf, 4, 2, 1, 1, true);
  add(nf, nf, 3, 1, 1, 1, false);
  add(nf, 6, 4, 2, 1, 1, true);
  add(6, 6, 3, 1, 1, 1, false);
  add(6, 3, 3, 1, 1, 1, false, false, false);
  zero_grad();
}

template <typename T>
void FillerNet<T>::init_gaussian(std::uint64_t seed) {
  Rng rng(seed);
  for (ConvLayer<T>& l : layers_) {
    const double sd = std::sqrt(2.0 / l.geom.fan_in());
    for (T& w : l.weight) w = static_cast<T>(sd * rng.normal());
    std::fill(l.bias.begin(), l.bias.end(), T(0));
    std::fill(l.gamma.begin(), l.gamma.end(), T(1));
    std::fill(l.beta.begin(), l.beta.end(), T(0));
    std::fill(l.running_mean.begin(), l.running_mean.end(), T(0));
    std::fill(l.running_var.begin(), l.running_var.end(), T(1));
  }
}

template <typename T>
void FillerNet<T>::freeze_random_half(std::uint64_t seed) {
  Rng rng(seed);
  for (ConvLayer<T>& l : layers_) {
    std::vector<std::size_t> idx(l.weight.size());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx.begin(), idx.end());
    std::fill(l.frozen.begin(), l.frozen.end(), 0);
    for (std::size_t i = 0; i < idx.size() / 2; ++i) l.frozen[idx[i]] = 1;
  }
}

template <typename T>
void FillerNet<T>::unfreeze() {
  for (ConvLayer<T>& l : layers_) std::fill(l.frozen.begin(), l.frozen.end(), 0);
}

template <typename T>
void FillerNet<T>::check_input(const Tensor4<T>& x) const {
  if (x.c != cfg_.in_channels) throw ShapeError("filler input channel mismatch");
  if (x.h % 4 != 0 || x.w % 4 != 0) {
    throw ShapeError("filler input height and width must be divisible by 4");
  }
}

template <typename T>
Tensor4<T> FillerNet<T>::forward_train(const Tensor4<T>& x) {
  check_input(x);
  Tensor4<T> cur = x;
  std::vector<double> mean, var;
  for (ConvLayer<T>& l : layers_) {
    l.input = cur;
    Tensor4<T> z = conv_forward(cur, l.weight, l.bias, l.geom);
    if (l.batchnorm) {
      z = batchnorm_forward_train(z, l.gamma, l.beta, l.bn_cache, &mean, &var);
      const double count = static_cast<double>(z.n) * z.plane();
      const double unbias = count > 1 ? count / (count - 1) : 1.0;
      for (int c = 0; c < z.c; ++c) {
        l.running_mean[c] = static_cast<T>((1 - kBnMomentum) * l.running_mean[c] +
                                           kBnMomentum * mean[c]);
        l.running_var[c] = static_cast<T>((1 - kBnMomentum) * l.running_var[c] +
                                          kBnMomentum * var[c] * unbias);
      }
    }
    if (l.activation) {
      l.pre_activation = z;
      cur = leaky_relu(z);
    } else {
      cur = std::move(z);
    }
    l.has_cache = true;
  }
  return cur;
}

template <typename T>
Tensor4<T> FillerNet<T>::infer(const Tensor4<T>& x, Execution exec) const {
  check_input(x);
  Tensor4<T> cur = x;
  for (const ConvLayer<T>& l : layers_) {
    cur = conv_forward(cur, l.weight, l.bias, l.geom, exec);
    if (l.batchnorm) {
      cur = batchnorm_forward_infer(cur, l.gamma, l.beta, l.running_mean,
                                    l.running_var);
    }
    if (l.activation) cur = leaky_relu(cur);
  }
  return cur;
}

template <typename T>
Tensor4<T> FillerNet<T>::backward(const Tensor4<T>& dout) {
  Tensor4<T> d = dout;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    ConvLayer<T>& l = *it;
    if (!l.has_cache) throw StateError("backward without a cached forward pass");
    if (l.activation) d = leaky_relu_backward(l.pre_activation, d);
    if (l.batchnorm) {
      std::vector<T> dg, db;
      d = batchnorm_backward(d, l.gamma, l.bn_cache, dg, db);
      for (std::size_t c = 0; c < dg.size(); ++c) {
        l.d_gamma[c] += dg[c];
        l.d_beta[c] += db[c];
      }
    }
    ConvGrads<T> g = conv_backward(l.input, l.weight, !l.bias.empty(), d, l.geom);
    for (std::size_t j = 0; j < g.dw.size(); ++j) {
      if (!l.frozen[j]) l.d_weight[j] += g.dw[j];
    }
    for (std::size_t c = 0; c < g.db.size(); ++c) l.d_bias[c] += g.db[c];
    d = std::move(g.dx);
  }
  return d;
}

template <typename T>
void FillerNet<T>::zero_grad() {
  for (ConvLayer<T>& l : layers_) {
    l.d_weight.assign(l.weight.size(), T(0));
    l.d_bias.assign(l.bias.size(), T(0));
    l.d_gamma.assign(l.gamma.size(), T(0));
    l.d_beta.assign(l.beta.size(), T(0));
  }
}

template <typename T>
void FillerNet<T>::recalibrate_batchnorm(const Tensor4<T>& inputs) {
  check_input(inputs);
  Tensor4<T> cur = inputs;
  for (ConvLayer<T>& l : layers_) {
    cur = conv_forward(cur, l.weight, l.bias, l.geom);
    if (l.batchnorm) {
      const std::size_t plane = cur.plane();
      const double count = static_cast<double>(cur.n) * plane;
      for (int c = 0; c < cur.c; ++c) {
        double sum = 0, sq = 0;
        for (int i = 0; i < cur.n; ++i) {
          const T* p = cur.sample(i) + c * plane;
          for (std::size_t j = 0; j < plane; ++j) sum += p[j];
        }
        const double mean = sum / count;
        for (int i = 0; i < cur.n; ++i) {
          const T* p = cur.sample(i) + c * plane;
          for (std::size_t j = 0; j < plane; ++j) sq += (p[j] - mean) * (p[j] - mean);
        }
        l.running_mean[c] = static_cast<T>(mean);
        l.running_var[c] = static_cast<T>(sq / count);
      }
      cur = batchnorm_forward_infer(cur, l.gamma, l.beta, l.running_mean,
                                    l.running_var);
    }
    if (l.activation) cur = leaky_relu(cur);
  }
}

template <typename T>
std::vector<ParamRef<T>> FillerNet<T>::params() {
  std::vector<ParamRef<T>> p;
  for (ConvLayer<T>& l : layers_) {
    p.push_back({l.weight.data(), l.d_weight.data(), l.weight.size(),
                 l.frozen.data()});
    if (!l.bias.empty()) {
      p.push_back({l.bias.data(), l.d_bias.data(), l.bias.size(), nullptr});
    }
    if (l.batchnorm) {
      p.push_back({l.gamma.data(), l.d_gamma.data(), l.gamma.size(), nullptr});
      p.push_back({l.beta.data(), l.d_beta.data(), l.beta.size(), nullptr});
    }
  }
  return p;
}

template <typename T>
std::size_t FillerNet<T>::param_count() const {
  std::size_t n = 0;
  for (const ConvLayer<T>& l : layers_) {
    n += l.weight.size() + l.bias.size() + l.gamma.size() + l.beta.size();
  }
  return n;
}

template <typename T>
template <typename U>
FillerNet<U> FillerNet<T>::cast() const {
  FillerNet<U> out(cfg_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const ConvLayer<T>& a = layers_[i];
    ConvLayer<U>& b = out.layers()[i];
    const auto conv = [](const std::vector<T>& v) {
      return std::vector<U>(v.begin(), v.end());
    };
    b.weight = conv(a.weight);
    b.bias = conv(a.bias);
    b.gamma = conv(a.gamma);
    b.beta = conv(a.beta);
    b.running_mean = conv(a.running_mean);
    b.running_var = conv(a.running_var);
    b.frozen = a.frozen;
  }
  out.zero_grad();
  return out;
}

template struct ConvLayer<float>;
template struct ConvLayer<double>;
template class FillerNet<float>;
template class FillerNet<double>;
template FillerNet<double> FillerNet<float>::cast<double>() const;
template FillerNet<float> FillerNet<double>::cast<float>() const;

namespace {

constexpr char kMagic[] = "FILLNET1";
constexpr int kFormatVersion = 1;

std::string bits_to_hex(const std::vector<std::uint8_t>& flags) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::size_t byte = 0; byte * 8 < flags.size(); ++byte) {
    unsigned v = 0;
    for (int b = 0; b < 8 && byte * 8 + b < flags.size(); ++b) {
      if (flags[byte * 8 + b]) v |= 1u << b;
    }
    s.push_back(digits[v >> 4]);
    s.push_back(digits[v & 15]);
  }
  return s;
}

std::vector<std::uint8_t> hex_to_bits(const std::string& s, std::size_t n) {
  if (s.size() != 2 * ((n + 7) / 8)) throw FormatError("frozen bitset length");
  const auto nib = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw FormatError("bad hex digit in frozen bitset");
  };
  std::vector<std::uint8_t> flags(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = nib(s[2 * (i / 8)]) << 4 | nib(s[2 * (i / 8) + 1]);
    flags[i] = (v >> (i % 8)) & 1u;
  }
  return flags;
}

}  // namespace

void save_filler(const FillerNet<float>& net, const std::string& path) {
  nlohmann::json h;
  h["version"] = kFormatVersion;
  h["architecture"] = "filler18";
  h["n_f"] = net.config().n_f;
  h["design_height"] = net.config().design_height;
  h["in_channels"] = net.config().in_channels;
  h["dilations"] = FillerNet<float>::dilation_ladder(net.config().design_height);
  h["layers"] = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    h["layers"].push_back({{"type", l.geom.transposed ? "deconv" : "conv"},
                           {"in", l.geom.in_c},
                           {"out", l.geom.out_c},
                           {"kernel", l.geom.kernel},
                           {"stride", l.geom.stride},
                           {"pad", l.geom.pad},
                           {"dilation", l.geom.dilation},
                           {"batchnorm", l.batchnorm},
                           {"activation", l.activation},
                           {"weights", l.weight.size()},
                           {"frozen", bits_to_hex(l.frozen)}});
  }
  const std::string header = h.dump();
  ByteWriter w;
  w.put_string(std::string(kMagic, 8));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(header.size()));
  w.put_string(header);
  const auto put_all = [&](const std::vector<float>& v) {
    for (float x : v) w.put<float>(x);
  };
  for (const auto& l : net.layers()) {
    put_all(l.weight);
    put_all(l.bias);
    put_all(l.gamma);
    put_all(l.beta);
    put_all(l.running_mean);
    put_all(l.running_var);
  }
  write_file_bytes(path, w.bytes());
}

FillerNet<float> load_filler(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  ByteReader r(bytes);
  if (r.get_string(8) != std::string(kMagic, 8)) {
    throw FormatError("not a filler weight file");
  }
  const std::uint32_t len = r.get<std::uint32_t>();
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(r.get_string(len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("filler header: ") + e.what());
  }
  try {
    if (h.at("version").get<int>() != kFormatVersion) {
      throw FormatError("unsupported filler file version");
    }
    FillerConfig cfg;
    cfg.n_f = h.at("n_f").get<int>();
    cfg.design_height = h.at("design_height").get<int>();
    cfg.in_channels = h.at("in_channels").get<int>();
    FillerNet<float> net(cfg);
    const auto& layers = h.at("layers");
    if (layers.size() != net.layers().size()) {
      throw FormatError("filler layer count mismatch");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
      auto& l = net.layers()[i];
      const auto& j = layers[i];
      if (j.at("weights").get<std::size_t>() != l.weight.size() ||
          j.at("dilation").get<int>() != l.geom.dilation) {
        throw FormatError("filler layer shape mismatch");
      }
      l.frozen = hex_to_bits(j.at("frozen").get<std::string>(), l.weight.size());
    }
    const auto get_all = [&](std::vector<float>& v) {
      for (float& x : v) x = r.get<float>();
    };
    for (auto& l : net.layers()) {
      get_all(l.weight);
      get_all(l.bias);
      get_all(l.gamma);
      get_all(l.beta);
      get_all(l.running_mean);
      get_all(l.running_var);
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in filler file");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("filler header: ") + e.what());
  }
}

}  // namespace ibrsim::nn
