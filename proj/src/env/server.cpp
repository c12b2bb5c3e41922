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


#include "ibrsim/env/server.hpp"

#include <atomic>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "ibrsim/common/error.hpp"
#include "ibrsim/env/protocol.hpp"

namespace ibrsim::env {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Episode {
  explicit Episode(std::shared_ptr<const Assets> a, const EnvConfig& c)
      : env(std::move(a), c) {}
  Env env;
  std::uint32_t next_frame = 1;
  bool attached = false;
  Clock::time_point detached_at{};
};

json error_json(const std::string& message) {
  return {{"type", "error"}, {"message", message}};
}

json modality_list(ModalitySet ms) {
  json out = json::array();
  for (Modality m : ms.list()) out.push_back(modality_name(m));
  return out;
}

}  // namespace

struct Server::Impl {
  std::shared_ptr<const Assets> assets;
  EnvConfig env_cfg;
  ServerConfig cfg;
  asio::io_context io;
  std::optional<tcp::acceptor> acceptor;
  std::optional<asio::steady_timer> reaper;
  std::thread thread;
  std::map<std::string, std::shared_ptr<Episode>> episodes;
  std::uint64_t next_session = 1;
  mutable std::mutex mutex;  // guards `episodes` for session_count()

  struct Connection;

  void bind() {
    const tcp::endpoint ep(asio::ip::make_address(cfg.address), cfg.port);
    acceptor.emplace(io);
    acceptor->open(ep.protocol());
    acceptor->set_option(asio::socket_base::reuse_address(true));
    acceptor->bind(ep);
    acceptor->listen();
    reaper.emplace(io);
    accept();
    reap();
  }

  void accept();
  void reap() {
    reaper->expires_after(std::chrono::milliseconds(250));
    reaper->async_wait([this](beast::error_code ec) {
      if (ec) return;
      const auto now = Clock::now();
      std::lock_guard lock(mutex);
      for (auto it = episodes.begin(); it != episodes.end();) {
        const auto& e = *it->second;
        if (!e.attached && now - e.detached_at > cfg.resume_window) {
          it = episodes.erase(it);
        } else {
          ++it;
        }
      }
      reap();
    });
  }
};

struct Server::Impl::Connection
    : std::enable_shared_from_this<Server::Impl::Connection> {
  Connection(Impl& s, tcp::socket socket)
      : server(s), ws(std::move(socket)), heartbeat(ws.get_executor()) {}

  Impl& server;
  websocket::stream<tcp::socket> ws;
  beast::flat_buffer buffer;
  asio::steady_timer heartbeat;
  std::deque<std::pair<bool, std::string>> outbox;  // (binary, bytes)
  std::shared_ptr<Episode> episode;
  std::string session;
  std::uint64_t heartbeat_seq = 0;
  bool closing = false;

  void start() {
    ws.read_message_max(server.cfg.transport_limit);
    ws.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->read();
    });
  }

  void read() {
    ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec,
                                                      std::size_t) {
      if (ec) {
        self->detach();
        return;
      }
      const bool text = self->ws.got_text();
      std::string msg = beast::buffers_to_string(self->buffer.data());
      self->buffer.consume(self->buffer.size());
      self->handle(text, msg);
      if (!self->closing) self->read();
    });
  }

  void send(const json& j) { queue(false, j.dump()); }
  void send_binary(const std::vector<std::uint8_t>& b) {
    queue(true, std::string(b.begin(), b.end()));
  }
  void queue(bool binary, std::string bytes) {
    outbox.emplace_back(binary, std::move(bytes));
    if (outbox.size() == 1) write_next();
  }
  void write_next() {
    auto& [binary, bytes] = outbox.front();
    ws.binary(binary);
    ws.async_write(asio::buffer(bytes),
                   [self = shared_from_this()](beast::error_code ec,
                                               std::size_t) {
                     if (ec) return;
                     self->outbox.pop_front();
                     if (!self->outbox.empty()) self->write_next();
                   });
  }

  void refuse(const std::string& reason) {
    closing = true;
    ws.async_close(websocket::close_reason(websocket::close_code::policy_error,
                                           reason),
                   [self = shared_from_this()](beast::error_code) {});
  }

  void detach() {
    heartbeat.cancel();
    if (!episode) return;
    std::lock_guard lock(server.mutex);
    episode->attached = false;
    episode->detached_at = Clock::now();
    episode.reset();
  }

  void tick() {
    heartbeat.expires_after(server.cfg.heartbeat);
    heartbeat.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closing) return;
      self->send({{"type", "heartbeat"}, {"seq", ++self->heartbeat_seq}});
      self->tick();
    });
  }

  void send_observation(const json& head, const Observation& obs,
                        float reward) {
    send(head);
    const std::uint32_t id = head.at("frame_id").get<std::uint32_t>();
    for (const auto& [m, img] : obs.images) {
      send_binary(encode_frame(id, m, img, reward));
    }
  }

  void hello(const json& j) {
    const int version = j.value("version", -1);
    if (version != kProtocolVersion) {
      refuse("protocol version mismatch: server speaks " +
             std::to_string(kProtocolVersion) + ", client sent " +
             std::to_string(version));
      return;
    }
    bool resumed = false;
    {
      std::lock_guard lock(server.mutex);
      if (j.contains("session")) {
        const std::string want = j.at("session").get<std::string>();
        auto it = server.episodes.find(want);
        if (it != server.episodes.end() && !it->second->attached) {
          episode = it->second;
          session = want;
          resumed = true;
        }
      }
      if (!episode) {
        session = "s" + std::to_string(server.next_session++);
        episode = std::make_shared<Episode>(server.assets, server.env_cfg);
        server.episodes[session] = episode;
      }
      episode->attached = true;
    }
    send({{"type", "hello"},
          {"version", kProtocolVersion},
          {"session", session},
          {"resumed", resumed},
          {"resolution", server.env_cfg.resolution},
          {"modalities", modality_list(episode->env.modalities())}});
    tick();
  }

  void handle(bool text, const std::string& msg) {
    if (!text) {
      send(error_json("control messages must be text"));
      return;
    }
    if (msg.size() > server.cfg.max_message) {
      send(error_json("message of " + std::to_string(msg.size()) +
                      " bytes exceeds the " +
                      std::to_string(server.cfg.max_message) + " byte limit"));
      return;
    }
    json j;
    try {
      j = json::parse(msg);
    } catch (const json::exception&) {
      send(error_json("malformed JSON"));
      return;
    }
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
      send(error_json("message needs a string 'type'"));
      return;
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "hello") {
      if (episode) {
        send(error_json("already greeted"));
      } else {
        hello(j);
      }
      return;
    }
    if (type == "ping") {
      send({{"type", "pong"}, {"nonce", j.value("nonce", json())}});
      return;
    }
    if (!episode) {
      send(error_json("send hello first"));
      return;
    }
    try {
      Env& env = episode->env;
      if (type == "reset") {
        const TaskSpec task = task_from_json(j.value("task", json::object()));
        const Observation obs = env.reset(task, j.value("seed", 0ull));
        const json head = {{"type", "observation"},
                           {"frame_id", episode->next_frame++},
                           {"sensors", obs.sensors},
                           {"target", {env.target().x(), env.target().y(),
                                       env.target().z()}},
                           {"modalities", modality_list(env.modalities())}};
        send_observation(head, obs, 0.0f);
      } else if (type == "step") {
        const auto a = parse_action(j.value("action", ""));
        if (!a) {
          send(error_json("unknown action"));
          return;
        }
        const StepResult r = env.step(*a);
        send_observation(step_to_json(r, episode->next_frame++),
                         r.observation, static_cast<float>(r.reward));
      } else if (type == "set_modality") {
        ModalitySet ms;
        std::vector<std::string> names;
        if (j.contains("modalities")) {
          names = j.at("modalities").get<std::vector<std::string>>();
        } else {
          names.push_back(j.value("modality", ""));
        }
        for (const auto& n : names) {
          const auto m = parse_modality(n);
          if (!m) throw FormatError("unknown modality '" + n + "'");
          ms.add(*m);
        }
        env.set_modalities(ms);
        send({{"type", "modality"}, {"modalities", modality_list(ms)}});
      } else {
        send(error_json("unknown message type '" + type + "'"));
      }
    } catch (const Error& e) {
      send(error_json(e.what()));
    } catch (const json::exception& e) {
      send(error_json(std::string("bad field: ") + e.what()));
    }
  }
};

void Server::Impl::accept() {
  acceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<Connection>(*this, std::move(socket))->start();
    accept();
  });
}

Server::Server(std::shared_ptr<const Assets> assets, const EnvConfig& env_cfg,
               const ServerConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  impl_->assets = std::move(assets);
  impl_->env_cfg = env_cfg;
  impl_->cfg = cfg;
  Env probe(impl_->assets, env_cfg);  // validates the configuration early
}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  impl_->bind();
  const auto port = impl_->acceptor->local_endpoint().port();
  impl_->thread = std::thread([this] { impl_->io.run(); });
  return port;
}

void Server::run() {
  impl_->bind();
  impl_->io.run();
}

void Server::stop() {
  impl_->io.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t Server::session_count() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->episodes.size();
}

// Client.

struct Client::Impl {
  asio::io_context io;
  websocket::stream<tcp::socket> ws{io};
  bool open = false;
};

Client::Client() : impl_(std::make_unique<Impl>()) {}
Client::~Client() { close(); }

void Client::connect(const std::string& host, std::uint16_t port,
                     std::optional<std::string> session, int version) {
  tcp::resolver resolver(impl_->io);
  const auto results = resolver.resolve(host, std::to_string(port));
  asio::connect(impl_->ws.next_layer(), results.begin(), results.end());
  impl_->ws.read_message_max(64u << 20);
  impl_->ws.handshake(host + ":" + std::to_string(port), "/");
  impl_->open = true;
  json hello = {{"type", "hello"}, {"version", version}};
  if (session) hello["session"] = *session;
  send_text(hello.dump());
  json reply;
  try {
    reply = read_json();
  } catch (const beast::system_error& e) {
    impl_->open = false;
    const std::string reason(impl_->ws.reason().reason.data(),
                             impl_->ws.reason().reason.size());
    throw ProtocolError("connection refused: " +
                        (reason.empty() ? std::string(e.what()) : reason));
  }
  if (reply.value("type", "") != "hello") {
    throw ProtocolError("unexpected hello reply: " + reply.dump());
  }
  session_ = reply.at("session").get<std::string>();
  resumed_ = reply.at("resumed").get<bool>();
}

void Client::send_text(const std::string& text) {
  impl_->ws.text(true);
  impl_->ws.write(asio::buffer(text));
}

json Client::read_json() {
  for (;;) {
    beast::flat_buffer buf;
    impl_->ws.read(buf);
    if (!impl_->ws.got_text()) throw ProtocolError("expected a text message");
    json j = json::parse(beast::buffers_to_string(buf.data()));
    if (j.value("type", "") == "heartbeat") {
      ++heartbeats_;
      continue;
    }
    return j;
  }
}

StepResult Client::read_observation(const json& head) {
  const std::string type = head.value("type", "");
  if (type == "error") throw ProtocolError(head.value("message", "error"));
  StepResult r;
  r.observation.sensors =
      head.at("sensors").get<std::array<double, kSensorCount>>();
  if (type == "step_result") {
    r.reward = head.at("reward").get<double>();
    r.done = head.at("done").get<bool>();
    r.info.collisions = head.at("collisions").get<int>();
    r.info.step = head.at("step").get<int>();
    r.info.collided = head.at("collided").get<bool>();
    r.info.potential_reward = head.at("potential_reward").get<double>();
  } else if (type != "observation") {
    throw ProtocolError("unexpected reply: " + head.dump());
  }
  last_frame_id_ = head.at("frame_id").get<std::uint32_t>();
  const std::size_t frames = head.at("modalities").size();
  while (r.observation.images.size() < frames) {
    beast::flat_buffer buf;
    impl_->ws.read(buf);
    const std::string bytes = beast::buffers_to_string(buf.data());
    if (impl_->ws.got_text()) {
      ++heartbeats_;  // only heartbeats can interleave here
      continue;
    }
    const Frame f = decode_frame(std::span(
        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    if (f.header.frame_id != last_frame_id_) {
      throw ProtocolError("frame id does not match its observation");
    }
    r.observation.images[static_cast<Modality>(f.header.modality)] =
        frame_image(f);
  }
  return r;
}

StepResult Client::reset(const TaskSpec& task, std::uint64_t seed) {
  send_text(json{{"type", "reset"}, {"task", task_to_json(task)},
                 {"seed", seed}}.dump());
  return read_observation(read_json());
}

StepResult Client::step(Action a) {
  send_text(json{{"type", "step"}, {"action", action_name(a)}}.dump());
  return read_observation(read_json());
}

void Client::set_modalities(ModalitySet ms) {
  send_text(json{{"type", "set_modality"},
                 {"modalities", modality_list(ms)}}.dump());
  const json reply = read_json();
  if (reply.value("type", "") != "modality") {
    throw ProtocolError("set_modality failed: " + reply.dump());
  }
}

json Client::ping(const json& nonce) {
  send_text(json{{"type", "ping"}, {"nonce", nonce}}.dump());
  return read_json();
}

void Client::close() {
  if (!impl_->open) return;
  impl_->open = false;
  beast::error_code ec;
  impl_->ws.close(websocket::close_code::normal, ec);
}

}  // namespace ibrsim::env
