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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ibrsim/env/env.hpp"

namespace ibrsim::env {

struct ServerConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8421;  // 0 picks a free port
  std::chrono::milliseconds heartbeat{1000};
  std::chrono::milliseconds resume_window{60000};
  std::size_t max_message = 1 << 20;     // larger control messages get an error
  std::size_t transport_limit = 8 << 20;  // beyond this the socket is closed
};

// Websocket control and frame service. One connection drives one session;
// a dropped session stays resumable for `resume_window`.
//
// Control messages are single JSON objects. The first must be
//   {"type":"hello","version":1[,"session":"<id>"]}
// after which "reset", "step", "set_modality" and "ping" are accepted.
// Observations are followed by one binary frame per enabled modality.
class Server {
 public:
  Server(std::shared_ptr<const Assets> assets, const EnvConfig& env_cfg,
         const ServerConfig& cfg = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  std::uint16_t start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Blocking client used by tests, tools and scripted agents.
class Client {
 public:
  Client();
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  // Sends hello. Throws ProtocolError carrying the server's reason when the
  // connection is refused.
  void connect(const std::string& host, std::uint16_t port,
               std::optional<std::string> session = std::nullopt,
               int version = kClientProtocolVersion);
  const std::string& session() const { return session_; }
  bool resumed() const { return resumed_; }

  StepResult reset(const TaskSpec& task, std::uint64_t seed);
  StepResult step(Action a);
  void set_modalities(ModalitySet ms);
  nlohmann::json ping(const nlohmann::json& nonce);

  // Low level access: send text and read the next non-heartbeat message.
  void send_text(const std::string& text);
  nlohmann::json read_json();
  std::uint32_t last_frame_id() const { return last_frame_id_; }
  int heartbeats() const { return heartbeats_; }
  void close();

  static constexpr int kClientProtocolVersion = 1;

 private:
  StepResult read_observation(const nlohmann::json& head);
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string session_;
  bool resumed_ = false;
  std::uint32_t last_frame_id_ = 0;
  int heartbeats_ = 0;
};

}  // namespace ibrsim::env
