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

#include "ibrsim/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ibrsim/common/rng.hpp"

namespace ibrsim::nn {

Tensor4<float> images_to_tensor(const std::vector<Image>& images) {
  if (images.empty()) throw InvalidArgumentError("no images");
  const Image& f = images[0];
  Tensor4<float> t(static_cast<int>(images.size()), f.channels(), f.height(),
                   f.width());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& im = images[i];
    if (!im.same_shape(f)) throw ShapeError("images differ in shape");
    for (int c = 0; c < im.channels(); ++c) {
      for (int y = 0; y < im.height(); ++y) {
        for (int x = 0; x < im.width(); ++x) {
          t.at(static_cast<int>(i), c, y, x) = im.valid(x, y) ? im.at(x, y, c) : 0.0f;
        }
      }
    }
  }
  return t;
}

Tensor4<float> image_to_tensor(const Image& image) {
  return images_to_tensor({image});
}

Image tensor_to_image(const Tensor4<float>& t, int index) {
  Image im(t.w, t.h, t.c);
  for (int c = 0; c < t.c; ++c) {
    for (int y = 0; y < t.h; ++y) {
      for (int x = 0; x < t.w; ++x) im.at(x, y, c) = t.at(index, c, y, x);
    }
  }
  return im;
}

Image apply_net(const FillerNet<float>& net, const Image& image) {
  return tensor_to_image(net.infer(image_to_tensor(image)));
}

double identity_residual(const FillerNet<float>& net,
                         const Tensor4<float>& samples) {
  const Tensor4<float> y = net.infer(samples);
  double num = 0, den = 0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    num += std::abs(double(y.data[j]) - samples.data[j]);
    den += std::abs(double(samples.data[j]));
  }
  return den > 0 ? num / den : num;
}

namespace {

Tensor4<float> gather(const Tensor4<float>& all, const std::vector<int>& ids) {
  Tensor4<float> b(static_cast<int>(ids.size()), all.c, all.h, all.w);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(all.sample(ids[i]), all.sample_size(), b.sample(static_cast<int>(i)));
  }
  return b;
}

}  // namespace

InitReport stochastic_identity_init(FillerNet<float>& net, std::uint64_t seed,
                                    const Tensor4<float>& samples,
                                    const InitConfig& cfg) {
  if (samples.size() == 0) throw InvalidArgumentError("no init samples");
  Rng rng(seed);
  net.init_gaussian(rng.next());
  net.freeze_random_half(rng.next());
  net.zero_grad();
  AdamState adam;
  std::vector<int> order(samples.n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  InitReport rep;
  const int batch = std::min(cfg.batch, samples.n);
  for (int step = 1; step <= cfg.max_steps; ++step) {
    std::vector<int> ids;
    while (static_cast<int>(ids.size()) < batch) {
      if (cursor == order.size()) {
        rng.shuffle(order.begin(), order.end());
        cursor = 0;
      }
      ids.push_back(order[cursor++]);
    }
    const Tensor4<float> x = gather(samples, ids);
    const Tensor4<float> y = net.forward_train(x);
    Tensor4<float> g(y.n, y.c, y.h, y.w);
    double den = 0;
    for (float v : x.data) den += std::abs(v);
    den = std::max(den, 1e-12);
    for (std::size_t j = 0; j < y.size(); ++j) {
      const float d = y.data[j] - x.data[j];
      g.data[j] = static_cast<float>((d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / den);
    }
    net.zero_grad();
    net.backward(g);
    adam_step(net.params(), adam, cfg.lr);
    if (step % cfg.check_every == 0 || step == cfg.max_steps) {
      net.recalibrate_batchnorm(samples);
      rep.residual = identity_residual(net, samples);
      rep.steps = step;
      if (cfg.on_check) cfg.on_check(step, rep.residual);
      if (!std::isfinite(rep.residual)) {
        throw DivergenceError("identity init produced non-finite output");
      }
      if (rep.residual < cfg.target_residual) break;
    }
  }
  net.zero_grad();
  if (!(rep.residual < cfg.target_residual)) {
    throw InitFailureError("identity init did not converge", rep.residual);
  }
  return rep;
}

namespace {

struct CropSampler {
  const std::vector<ImagePair>& pairs;
  int crop;
  Rng& rng;

  // Same window for source and target.
  void take(int idx, Tensor4<float>& s, Tensor4<float>& t, int slot) {
    const Image& a = pairs[idx].source;
    const Image& b = pairs[idx].target;
    const int x0 = rng.uniform_int(0, a.width() - crop);
    const int y0 = rng.uniform_int(0, a.height() - crop);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < crop; ++y) {
        for (int x = 0; x < crop; ++x) {
          s.at(slot, c, y, x) = a.valid(x0 + x, y0 + y) ? a.at(x0 + x, y0 + y, c) : 0.0f;
          t.at(slot, c, y, x) = b.valid(x0 + x, y0 + y) ? b.at(x0 + x, y0 + y, c) : 0.0f;
        }
      }
    }
  }
};

void check_pairs(const std::vector<ImagePair>& pairs, const TrainConfig& cfg) {
  if (pairs.empty()) throw InvalidArgumentError("no training pairs");
  if (cfg.crop < 4 || cfg.crop % 4 != 0) {
    throw InvalidArgumentError("crop must be a positive multiple of 4");
  }
  for (const ImagePair& p : pairs) {
    if (!p.source.same_shape(p.target) || p.source.channels() != 3) {
      throw ShapeError("pair images must be matching RGB");
    }
    if (p.source.width() < cfg.crop || p.source.height() < cfg.crop) {
      throw ShapeError("pair images smaller than the crop");
    }
  }
  cfg.loss.validate();
}

Tensor4<float> all_images(const std::vector<ImagePair>& pairs, bool source) {
  std::vector<Image> v;
  for (const ImagePair& p : pairs) v.push_back(source ? p.source : p.target);
  return images_to_tensor(v);
}

// Recalibration needs inputs the net can take; center crops when the pair
// images are larger than the training crop.
Tensor4<float> center_crops(const Tensor4<float>& t, int crop) {
  if (t.h == crop && t.w == crop) return t;
  Tensor4<float> out(t.n, t.c, crop, crop);
  const int y0 = (t.h - crop) / 2, x0 = (t.w - crop) / 2;
  for (int i = 0; i < t.n; ++i) {
    for (int c = 0; c < t.c; ++c) {
      for (int y = 0; y < crop; ++y) {
        for (int x = 0; x < crop; ++x) out.at(i, c, y, x) = t.at(i, c, y0 + y, x0 + x);
      }
    }
  }
  return out;
}

template <typename Step>
TrainHistory run_epochs(const std::vector<ImagePair>& pairs,
                        const TrainConfig& cfg, Step&& step) {
  Rng rng(cfg.seed);
  CropSampler sampler{pairs, cfg.crop, rng};
  TrainHistory h;
  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  for (int e = 0; e < cfg.epochs; ++e) {
    rng.shuffle(order.begin(), order.end());
    double sum = 0;
    int batches = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch) {
      const int n = static_cast<int>(std::min<std::size_t>(cfg.batch, order.size() - b));
      Tensor4<float> s(n, 3, cfg.crop, cfg.crop), t(n, 3, cfg.crop, cfg.crop);
      for (int i = 0; i < n; ++i) sampler.take(order[b + i], s, t, i);
      const double loss = step(s, t);
      if (!std::isfinite(loss)) throw DivergenceError("training loss is not finite");
      sum += loss;
      ++batches;
    }
    h.epoch_loss.push_back(sum / batches);
  }
  return h;
}

}  // namespace

TrainHistory train_filler(FillerNet<float>& f,
                          const std::vector<ImagePair>& pairs,
                          const TrainConfig& cfg) {
  check_pairs(pairs, cfg);
  AdamState adam;
  TrainHistory h = run_epochs(pairs, cfg, [&](const Tensor4<float>& s,
                                              const Tensor4<float>& t) {
    const Tensor4<float> y = f.forward_train(s);
    const LossResult<float> l = perceptual_color_loss(y, t, cfg.loss);
    f.zero_grad();
    f.backward(l.grad);
    adam_step(f.params(), adam, cfg.lr);
    return l.value;
  });
  f.zero_grad();
  f.recalibrate_batchnorm(center_crops(all_images(pairs, true), cfg.crop));
  return h;
}

TrainHistory train_joint(FillerNet<float>& f, FillerNet<float>& u,
                         const std::vector<ImagePair>& pairs,
                         const TrainConfig& cfg) {
  check_pairs(pairs, cfg);
  AdamState adam_f, adam_u;
  TrainHistory h = run_epochs(pairs, cfg, [&](const Tensor4<float>& s,
                                              const Tensor4<float>& t) {
    const Tensor4<float> fs = f.forward_train(s);
    const Tensor4<float> ut = u.forward_train(t);
    const LossResult<float> first = perceptual_color_loss(fs, t, cfg.loss);
    const LossResult<float> second = perceptual_color_loss(fs, ut, cfg.loss);
    // D is symmetric, so its gradient in the second argument is the first
    // argument's gradient with the roles swapped.
    const LossResult<float> second_u = perceptual_color_loss(ut, fs, cfg.loss);
    Tensor4<float> gf = first.grad;
    for (std::size_t j = 0; j < gf.size(); ++j) gf.data[j] += second.grad.data[j];
    f.zero_grad();
    u.zero_grad();
    f.backward(gf);
    u.backward(second_u.grad);
    adam_step(f.params(), adam_f, cfg.lr);
    adam_step(u.params(), adam_u, cfg.lr);
    return first.value + second.value;
  });
  f.zero_grad();
  u.zero_grad();
  f.recalibrate_batchnorm(center_crops(all_images(pairs, true), cfg.crop));
  u.recalibrate_batchnorm(center_crops(all_images(pairs, false), cfg.crop));
  return h;
}

}  // namespace ibrsim::nn
