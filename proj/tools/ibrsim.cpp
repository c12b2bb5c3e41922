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


// Command-line front end for scene generation, rendering, training, serving
// and measurement.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ibrsim/common/error.hpp"
#include "ibrsim/common/rng.hpp"
#include "ibrsim/env/server.hpp"
#include "ibrsim/ibr/pipeline.hpp"
#include "ibrsim/mesh/hull.hpp"
#include "ibrsim/mesh/navigation.hpp"
#include "ibrsim/metrics/bench.hpp"
#include "ibrsim/metrics/metrics.hpp"
#include "ibrsim/nn/train.hpp"
#include "ibrsim/synth/corruption.hpp"
#include "ibrsim/synth/pairs.hpp"
#include "ibrsim/synth/scene.hpp"

namespace fs = std::filesystem;
using namespace ibrsim;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text << '\n';
}

geom::Pose6D parse_pose(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidArgumentError("bad pose component '" + item + "'");
    }
  }
  if (v.size() != 6) throw InvalidArgumentError("pose needs x,y,z,roll,pitch,yaw");
  return geom::Pose6D::make(v[0], v[1], v[2], v[3], v[4], v[5]);
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stoi(item));
  return v;
}

std::vector<Image> images_of(const std::vector<nn::ImagePair>& pairs, bool source) {
  std::vector<Image> v;
  for (const auto& p : pairs) v.push_back(source ? p.source : p.target);
  return v;
}

// Identity init with a warning instead of an abort when the budget runs out;
// the partially initialized network is still a usable starting point.
void identity_init(nn::FillerNet<float>& net, std::uint64_t seed,
                   const std::vector<Image>& samples, int steps) {
  nn::InitConfig cfg;
  cfg.max_steps = steps;
  cfg.on_check = [](int step, double r) {
    std::fprintf(stderr, "  init step %d residual %.4f\n", step, r);
  };
  try {
    const auto rep = nn::stochastic_identity_init(net, seed, nn::images_to_tensor(samples), cfg);
    std::fprintf(stderr, "identity init converged: residual %.4f after %d steps\n",
                 rep.residual, rep.steps);
  } catch (const InitFailureError& e) {
    std::fprintf(stderr, "warning: identity init stopped at residual %.4f (target %.2f)\n",
                 e.final_residual(), cfg.target_residual);
  }
}

void print_history(const nn::TrainHistory& h) {
  for (std::size_t e = 0; e < h.epoch_loss.size(); ++e) {
    std::fprintf(stderr, "  epoch %zu loss %.5f\n", e, h.epoch_loss[e]);
  }
}

std::vector<std::string> ppm_files(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".ppm") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("no .ppm images in " + dir);
  return out;
}

std::shared_ptr<const env::Assets> load_assets(const std::string& scene,
                                               const std::string& dataset,
                                               const std::string& filler) {
  std::optional<nn::FillerNet<float>> f;
  if (!filler.empty()) f = nn::load_filler(filler);
  return std::make_shared<env::Assets>(mesh::load_obj(scene),
                                       geom::PanoramaDataset::load(dataset),
                                       std::move(f));
}

env::Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ibrsim: image-based rendering simulator for embodied agents"};
  app.require_subcommand(1);

  // gen-scene
  std::string spec_path, out_path;
  auto* gen_scene = app.add_subcommand("gen-scene", "Generate a textured scene mesh");
  gen_scene->add_option("--spec", spec_path, "Scene spec JSON")->required();
  gen_scene->add_option("--out", out_path, "Output OBJ (labels go next to it)")->required();

  // gen-dataset
  std::string scene_path, dir_path;
  double density = 0.2;
  int pano_w = 256, pano_h = 128;
  std::uint64_t seed = 1;
  auto* gen_dataset = app.add_subcommand("gen-dataset", "Render oracle RGB-D panoramas");
  gen_dataset->add_option("--scene", scene_path, "Scene OBJ")->required();
  gen_dataset->add_option("--density", density, "Panoramas per square meter");
  gen_dataset->add_option("--out", dir_path, "Dataset directory")->required();
  gen_dataset->add_option("--width", pano_w, "Panorama width");
  gen_dataset->add_option("--height", pano_h, "Panorama height");
  gen_dataset->add_option("--seed", seed, "Pose sampling seed");

  // corrupt
  std::string in_dir;
  auto* corrupt = app.add_subcommand("corrupt", "Apply the domain corruption to a dataset's RGB");
  corrupt->add_option("--in", in_dir, "Input dataset directory")->required();
  corrupt->add_option("--spec", spec_path, "Corruption spec JSON")->required();
  corrupt->add_option("--out", dir_path, "Output dataset directory")->required();

  // gen-pairs
  std::string dataset_path, corruption_path;
  int pair_count = 200;
  auto* gen_pairs = app.add_subcommand("gen-pairs", "Render (I_s, I_t) training crops");
  gen_pairs->add_option("--scene", scene_path, "Scene OBJ")->required();
  gen_pairs->add_option("--dataset", dataset_path, "Dataset directory")->required();
  gen_pairs->add_option("--corruption", corruption_path, "Corruption spec JSON");
  gen_pairs->add_option("--count", pair_count, "Number of pairs");
  gen_pairs->add_option("--seed", seed, "Pose and crop seed");
  gen_pairs->add_option("--out", dir_path, "Pair directory")->required();

  // render-view
  std::string mesh_path, pose_str, mask_path;
  ibr::RenderConfig rc;
  auto* render = app.add_subcommand("render-view", "Render a novel equirectangular view");
  render->add_option("--dataset", dataset_path, "Dataset directory")->required();
  render->add_option("--mesh", mesh_path, "Scene OBJ")->required();
  render->add_option("--pose", pose_str, "x,y,z,roll,pitch,yaw")->required();
  render->add_option("--out", out_path, "Output PPM")->required();
  render->add_option("--mask", mask_path, "Dis-occlusion mask PGM (255 = hole)");
  render->add_option("--k", rc.k, "Source views");
  render->add_option("--lambda-d", rc.lambda_d, "Density softmax temperature");
  render->add_option("--depth-eps", rc.depth_eps, "Depth test threshold (m)");
  render->add_option("--width", rc.width, "Output width");
  render->add_option("--height", rc.height, "Output height");

  // train-filler
  std::string pairs_dir;
  int nf = 4, epochs = 50, init_steps = 4000;
  double lr = 2e-4;
  std::uint64_t train_seed = 7;
  auto* train_filler = app.add_subcommand("train-filler", "Identity-init and train the filler f");
  train_filler->add_option("--pairs", pairs_dir, "Pair directory")->required();
  train_filler->add_option("--nf", nf, "Base channel count");
  train_filler->add_option("--epochs", epochs, "Epochs");
  train_filler->add_option("--seed", train_seed, "Seed");
  train_filler->add_option("--lr", lr, "Adam learning rate");
  train_filler->add_option("--init-steps", init_steps, "Identity init step budget");
  train_filler->add_option("--out", out_path, "Output weights")->required();

  // train-goggles
  std::string f_path, out_u, out_f;
  int joint_epochs = 50;
  double joint_lr = 2e-5;
  auto* train_goggles = app.add_subcommand("train-goggles", "Jointly train f and the goggles u");
  train_goggles->add_option("--f", f_path, "Pre-trained filler weights")->required();
  train_goggles->add_option("--out-u", out_u, "Output goggles weights")->required();
  train_goggles->add_option("--out-f", out_f, "Output jointly trained f (default: update --f)");
  train_goggles->add_option("--pairs", pairs_dir, "Pair directory")->required();
  train_goggles->add_option("--epochs", joint_epochs, "Epochs");
  train_goggles->add_option("--lr", joint_lr, "Adam learning rate");
  train_goggles->add_option("--seed", train_seed, "Seed");
  train_goggles->add_option("--init-steps", init_steps, "Identity init step budget for u");

  // serve
  std::string filler_path, address = "127.0.0.1";
  int port = 8421, res = 128;
  auto* serve = app.add_subcommand("serve", "Serve the environment over websocket");
  serve->add_option("--scene", scene_path, "Scene OBJ")->required();
  serve->add_option("--dataset", dataset_path, "Dataset directory")->required();
  serve->add_option("--filler", filler_path, "Filler weights (enables rgb_post)");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--res", res, "Observation resolution");
  serve->add_option("--address", address, "Bind address");

  // metrics
  std::string a_dir, b_dir, report_path, labels_path;
  auto* metrics_cmd = app.add_subcommand("metrics", "Compare two image directories");
  metrics_cmd->add_option("--a", a_dir, "First image directory")->required();
  metrics_cmd->add_option("--b", b_dir, "Second image directory")->required();
  metrics_cmd->add_option("--report", report_path, "Output JSON report")->required();
  metrics_cmd->add_option("--labels", labels_path, "JSON array of class labels for the entropy");

  // bench-fps
  std::string res_list = "128,256,512", output_list;
  int frames = 100, warmup = 10;
  auto* bench = app.add_subcommand("bench-fps", "Measure frames per second per output");
  bench->add_option("--scene", scene_path, "Scene OBJ")->required();
  bench->add_option("--dataset", dataset_path, "Dataset directory")->required();
  bench->add_option("--filler", filler_path, "Filler weights (random n_f=4 if omitted)");
  bench->add_option("--out", out_path, "Output JSON report")->required();
  bench->add_option("--res", res_list, "Comma-separated resolutions");
  bench->add_option("--frames", frames, "Timed frames per row");
  bench->add_option("--warmup", warmup, "Warmup frames per row");
  bench->add_option("--outputs", output_list, "Comma-separated rows (default: all)");

  // scene-stats
  int nav_samples = 2000;
  double cell = 0.1;
  auto* stats = app.add_subcommand("scene-stats", "SSA and navigation complexity of a scene");
  stats->add_option("--scene", scene_path, "Scene OBJ")->required();
  stats->add_option("--samples", nav_samples, "Sampled point pairs");
  stats->add_option("--cell", cell, "Grid cell (m)");
  stats->add_option("--seed", seed, "Pair sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_scene) {
      const auto spec = synth::scene_spec_from_json(read_text(spec_path));
      const auto m = synth::generate_scene(spec);
      mesh::save_obj(m, out_path);
      std::printf("%zu triangles -> %s\n", m.face_count(), out_path.c_str());
    } else if (*gen_dataset) {
      const auto m = mesh::load_obj(scene_path);
      const mesh::Bvh bvh(m);
      synth::PoseSampling ps;
      ps.seed = seed;
      const auto ds = synth::generate_dataset(m, bvh, density, pano_w, pano_h, ps);
      ds.save(dir_path);
      std::printf("%zu panoramas -> %s\n", ds.views.size(), dir_path.c_str());
    } else if (*corrupt) {
      const auto spec = synth::corruption_from_json(read_text(spec_path));
      auto ds = geom::PanoramaDataset::load(in_dir);
      for (auto& v : ds.views) {
        v.rgb = quantize_rgb8(synth::make_domain_pair(v.rgb, spec, static_cast<std::uint64_t>(v.id)));
      }
      ds.save(dir_path);
      std::printf("%zu panoramas -> %s\n", ds.views.size(), dir_path.c_str());
    } else if (*gen_pairs) {
      const auto m = mesh::load_obj(scene_path);
      const mesh::Bvh bvh(m);
      const auto ds = geom::PanoramaDataset::load(dataset_path);
      synth::PairSpec ps;
      ps.count = pair_count;
      ps.seed = seed;
      if (!corruption_path.empty()) {
        ps.corruption = synth::corruption_from_json(read_text(corruption_path));
      }
      const auto set = synth::generate_pairs(m, bvh, ds, ps);
      synth::save_pairs(dir_path, set);
      std::printf("%zu pairs -> %s\n", set.pairs.size(), dir_path.c_str());
    } else if (*render) {
      const auto m = mesh::load_obj(mesh_path);
      const mesh::Bvh bvh(m);
      const auto ds = geom::PanoramaDataset::load(dataset_path);
      const auto out = ibr::render_view(ds, m, bvh, parse_pose(pose_str), rc);
      write_ppm(out_path, out.image);
      if (!mask_path.empty()) write_pgm_mask(mask_path, out.image, true);
      std::printf("views");
      for (int v : out.views) std::printf(" %d", v);
      std::printf("; dis-occlusion %.4f\n", out.disocclusion_fraction());
    } else if (*train_filler) {
      const auto set = synth::load_pairs(pairs_dir);
      nn::FillerNet<float> f(nn::FillerConfig{nf, 32, 3});
      identity_init(f, train_seed, images_of(set.pairs, true), init_steps);
      nn::TrainConfig tc;
      tc.epochs = epochs;
      tc.lr = lr;
      tc.seed = train_seed;
      print_history(nn::train_filler(f, set.pairs, tc));
      nn::save_filler(f, out_path);
    } else if (*train_goggles) {
      const auto set = synth::load_pairs(pairs_dir);
      nn::FillerNet<float> f = nn::load_filler(f_path);
      nn::FillerNet<float> u(f.config());
      identity_init(u, mix_seed(train_seed, 1), images_of(set.pairs, false), init_steps);
      nn::TrainConfig tc;
      tc.epochs = joint_epochs;
      tc.lr = joint_lr;
      tc.seed = train_seed;
      print_history(nn::train_joint(f, u, set.pairs, tc));
      nn::save_filler(u, out_u);
      nn::save_filler(f, out_f.empty() ? f_path : out_f);
    } else if (*serve) {
      env::EnvConfig ec;
      ec.resolution = res;
      env::ServerConfig sc;
      sc.address = address;
      sc.port = static_cast<std::uint16_t>(port);
      env::Server server(load_assets(scene_path, dataset_path, filler_path), ec, sc);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("serving on ws://%s:%d\n", address.c_str(), port);
      std::fflush(stdout);
      server.run();
    } else if (*metrics_cmd) {
      const auto fa = ppm_files(a_dir), fb = ppm_files(b_dir);
      if (fa.size() != fb.size()) throw InvalidArgumentError("directories differ in image count");
      std::vector<Image> ia, ib;
      double l1 = 0, ssim = 0;
      for (std::size_t i = 0; i < fa.size(); ++i) {
        ia.push_back(read_ppm(fa[i]));
        ib.push_back(read_ppm(fb[i]));
        l1 += metrics::l1(ia.back(), ib.back());
        ssim += metrics::ssim(ia.back(), ib.back());
      }
      const double n = static_cast<double>(fa.size());
      const auto xa = metrics::extract_features(ia), xb = metrics::extract_features(ib);
      nlohmann::json rep = {{"schema_version", 1},
                            {"count", fa.size()},
                            {"l1", l1 / n},
                            {"ssim", ssim / n}};
      if (fa.size() >= 2) {
        rep["mmd2"] = metrics::mmd2_report(xa, xb);
        rep["mmd2_raw"] = metrics::mmd2_unbiased(xa, xb);
        rep["coral"] = metrics::coral(xa, xb);
      }
      rep["retrieval"] = {{"top1", metrics::retrieval_topk(xa, xb, 1)},
                          {"top2", metrics::retrieval_topk(xa, xb, 2)},
                          {"top5", metrics::retrieval_topk(xa, xb, 5)}};
      if (!labels_path.empty()) {
        const auto labels = nlohmann::json::parse(read_text(labels_path)).get<std::vector<std::int64_t>>();
        rep["class_entropy"] = metrics::class_entropy(labels);
      }
      write_text(report_path, rep.dump(2));
      std::printf("%s\n", rep.dump(2).c_str());
    } else if (*bench) {
      auto assets = load_assets(scene_path, dataset_path, filler_path);
      if (!assets->filler) {
        auto copy = std::make_shared<env::Assets>(*assets);
        copy->filler.emplace();
        copy->filler->init_gaussian(1);
        assets = copy;
      }
      metrics::BenchConfig bc;
      bc.resolutions = parse_ints(res_list);
      bc.frames = frames;
      bc.warmup = warmup;
      if (!output_list.empty()) {
        bc.outputs.clear();
        std::stringstream ss(output_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto o = metrics::parse_bench_output(item);
          if (!o) throw InvalidArgumentError("unknown output '" + item + "'");
          bc.outputs.push_back(*o);
        }
      }
      const auto rep = metrics::bench_to_json(metrics::fps_benchmark(assets, bc));
      write_text(out_path, rep.dump(2));
      for (const auto& r : rep.at("rows")) {
        std::printf("%4d  %-10s %10.2f fps\n", r.at("resolution").get<int>(),
                    r.at("output").get<std::string>().c_str(), r.at("fps").get<double>());
      }
    } else if (*stats) {
      const auto m = mesh::load_obj(scene_path);
      const mesh::Bvh bvh(m);
      const auto grid = mesh::occupancy_grid(m, bvh, cell);
      nlohmann::json rep = {{"ssa", mesh::ssa(m)},
                            {"navigation_complexity",
                             mesh::navigation_complexity(grid, nav_samples, seed)},
                            {"triangles", m.face_count()}};
      std::printf("%s\n", rep.dump(2).c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
