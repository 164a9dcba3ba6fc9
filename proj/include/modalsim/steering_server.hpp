// Copyright 2026 The modalsim Authors
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


// WebSocket front end for SteeringSession. Each connection gets its own
// simulation running on its own thread; plain HTTP requests are answered
// with files from an optional static directory.

#ifndef MODALSIM_STEERING_SERVER_HPP_
#define MODALSIM_STEERING_SERVER_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "modalsim/calibration.hpp"
#include "modalsim/engine.hpp"
#include "modalsim/steering.hpp"

namespace modalsim {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  std::filesystem::path static_dir;  // empty: no static files
  std::filesystem::path log_dir;     // empty: replay logs are not written
  SteeringOptions steering;
};

class SteeringServer {
 public:
  SteeringServer(CalibrationData calib, SimConfig config,
                 ServerOptions options = {});
  ~SteeringServer();

  SteeringServer(const SteeringServer&) = delete;
  SteeringServer& operator=(const SteeringServer&) = delete;

  // Binds and starts accepting on a background thread. Throws
  // std::runtime_error if the address cannot be bound.
  void start();
  // Closes the listener and every open session, then joins the I/O thread.
  void stop();
  // Blocks until stop() is called from elsewhere.
  void wait();

  std::uint16_t port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace modalsim

#endif  // MODALSIM_STEERING_SERVER_HPP_
