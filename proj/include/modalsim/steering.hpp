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

// Live steering of one simulation through JSON messages.
//
// Client commands ({"id": <int>, "type": <string>, ...}):
//   pause | resume | step {n} | set_speed {ticks_per_second}
//   intervene {action, mode?, criterion?, delta?, value?, target?}
//   reset_habits
//   snapshot_request {view: metrics|agents|layout|priorities_histogram|
//                           values_histogram}
//   replay_log
//
// Server events ({"type": ...}):
//   tick_metrics {tick, shares, satisfaction, counts}
//   state_view {id, view, data}
//   ack {id}
//   error {id, message}
//
// Commands are queued and applied only between ticks. Every command gets
// exactly one ack or error; snapshot_request and replay_log send their
// state_view before the ack.
//
// This class knows nothing about sockets; SteeringServer carries its
// messages over WebSocket.

#ifndef MODALSIM_STEERING_HPP_
#define MODALSIM_STEERING_HPP_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "modalsim/calibration.hpp"
#include "modalsim/engine.hpp"
#include "modalsim/scenario.hpp"

namespace modalsim {

inline constexpr double kMaxTicksPerSecond = 1000.0;
inline constexpr std::size_t kHistogramBins = 10;

enum class SnapshotView {
  kMetrics,
  kAgents,
  kLayout,
  kPrioritiesHistogram,
  kValuesHistogram,
};

struct PauseCommand {};
struct ResumeCommand {};
struct StepCommand {
  std::uint64_t n = 1;
};
struct SetSpeedCommand {
  double ticks_per_second = 10.0;
};
struct InterveneCommand {
  Intervention action;
};
struct ResetHabitsCommand {};
struct SnapshotRequest {
  SnapshotView view = SnapshotView::kMetrics;
};
struct ReplayLogRequest {};

struct ClientCommand {
  std::int64_t id = 0;
  std::variant<PauseCommand, ResumeCommand, StepCommand, SetSpeedCommand,
               InterveneCommand, ResetHabitsCommand, SnapshotRequest,
               ReplayLogRequest>
      body;
};

// Throws ValidationError; `id_out` receives the command id whenever it
// could be read, so the error can be attributed.
ClientCommand parse_command(std::string_view text,
                            std::optional<std::int64_t>* id_out = nullptr);

struct SteeringOptions {
  double initial_speed = 10.0;  // ticks per second
  bool start_paused = true;
  // Pending outgoing events; beyond this the oldest tick_metrics are dropped.
  std::size_t outbox_capacity = 1024;
};

class SteeringSession {
 public:
  SteeringSession(const CalibrationData& calib, SimConfig config,
                  SteeringOptions options = {});

  // Thread-safe. Queues a raw client message; malformed input is answered
  // with an error event right away and never reaches the simulation.
  void submit(std::string_view text);

  // Thread-safe. Called (from the simulation thread) whenever new events
  // are available.
  void set_notifier(std::function<void()> notify);

  // Thread-safe. Oldest first.
  std::optional<nlohmann::json> next_event();
  std::vector<nlohmann::json> drain_events();
  std::size_t dropped_events() const;

  // The following run on the owner thread only.

  // Applies every queued command. Only call between ticks.
  void process_commands();
  // Steps once if a step is pending or the session is running. Returns true
  // if a tick ran.
  bool advance();
  // Pacing loop: applies commands between ticks and steps at the configured
  // speed until stop is requested.
  void run(std::stop_token stop);

  bool paused() const { return paused_; }
  double speed() const { return speed_; }
  const Simulation& simulation() const { return sim_; }

  // Interventions applied so far, as a scenario that reproduces this
  // session headlessly when run with the same calibration.
  Scenario replay_log() const;

 private:
  void handle(const ClientCommand& cmd);
  nlohmann::json view(SnapshotView v) const;
  void emit(nlohmann::json event, bool droppable);
  void emit_error(std::optional<std::int64_t> id, const std::string& message);

  Simulation sim_;
  SimConfig initial_config_;
  SteeringOptions options_;
  bool paused_;
  double speed_;
  std::uint64_t pending_steps_ = 0;
  std::optional<MetricsSnapshot> last_metrics_;
  std::vector<TimedIntervention> log_;

  mutable std::mutex inbox_mu_;
  std::condition_variable_any inbox_cv_;
  std::deque<ClientCommand> inbox_;

  mutable std::mutex outbox_mu_;
  struct Outgoing {
    nlohmann::json event;
    bool droppable;
  };
  std::deque<Outgoing> outbox_;
  std::size_t dropped_ = 0;
  std::function<void()> notify_;
};

// Bins a value in [0, 100] into kHistogramBins equal bins; 100 falls in the
// last bin.
std::size_t histogram_bin(double v);

}  // namespace modalsim

#endif  // MODALSIM_STEERING_HPP_
