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

#include "modalsim/steering.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"

namespace modalsim {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kMaxStepBatch = 1'000'000;

void only_keys(const json& j, std::initializer_list<std::string> keys) {
  json_util::expect_keys(j, keys, "command");
}

std::optional<SnapshotView> parse_view(const std::string& name) {
  if (name == "metrics") return SnapshotView::kMetrics;
  if (name == "agents") return SnapshotView::kAgents;
  if (name == "layout") return SnapshotView::kLayout;
  if (name == "priorities_histogram") return SnapshotView::kPrioritiesHistogram;
  if (name == "values_histogram") return SnapshotView::kValuesHistogram;
  return std::nullopt;
}

std::string_view view_name(SnapshotView v) {
  switch (v) {
    case SnapshotView::kMetrics: return "metrics";
    case SnapshotView::kAgents: return "agents";
    case SnapshotView::kLayout: return "layout";
    case SnapshotView::kPrioritiesHistogram: return "priorities_histogram";
    case SnapshotView::kValuesHistogram: return "values_histogram";
  }
  return "metrics";
}

json empty_histograms() {
  json by_mode = json::object();
  for (Mode m : kAllModes) {
    for (Criterion c : kAllCriteria) {
      by_mode[std::string(to_string(m))][std::string(to_string(c))] =
          std::vector<std::size_t>(kHistogramBins, 0);
    }
  }
  return by_mode;
}

}  // namespace

std::size_t histogram_bin(double v) {
  const double clamped = std::clamp(v, kValueMin, kValueMax);
  const auto bin = static_cast<std::size_t>(
      clamped / (kValueMax - kValueMin) * static_cast<double>(kHistogramBins));
  return std::min(bin, kHistogramBins - 1);
}

ClientCommand parse_command(std::string_view text,
                            std::optional<std::int64_t>* id_out) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw ValidationError("malformed message: not JSON");
  }
  if (!j.is_object()) throw ValidationError("malformed message: expected object");

  ClientCommand cmd;
  auto id = j.find("id");
  if (id == j.end() || !id->is_number_integer()) {
    throw ValidationError("command.id: expected integer");
  }
  cmd.id = id->get<std::int64_t>();
  if (id_out) *id_out = cmd.id;

  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) {
    throw ValidationError("command.type: expected string");
  }
  const auto type = type_it->get<std::string>();

  if (type == "pause") {
    only_keys(j, {"id", "type"});
    cmd.body = PauseCommand{};
  } else if (type == "resume") {
    only_keys(j, {"id", "type"});
    cmd.body = ResumeCommand{};
  } else if (type == "step") {
    only_keys(j, {"id", "type", "n"});
    StepCommand s;
    if (auto n = j.find("n"); n != j.end()) {
      if (!n->is_number_unsigned() || n->get<std::uint64_t>() == 0 ||
          n->get<std::uint64_t>() > kMaxStepBatch) {
        throw ValidationError("command.n: expected integer in [1, 1000000]");
      }
      s.n = n->get<std::uint64_t>();
    }
    cmd.body = s;
  } else if (type == "set_speed") {
    only_keys(j, {"id", "type", "ticks_per_second"});
    const double tps = json_util::number(
        json_util::member(j, "ticks_per_second", "command"),
        "command.ticks_per_second");
    if (!(tps > 0.0 && tps <= kMaxTicksPerSecond)) {
      throw ValidationError("command.ticks_per_second: must lie in (0, 1000]");
    }
    cmd.body = SetSpeedCommand{tps};
  } else if (type == "intervene") {
    cmd.body = InterveneCommand{
        intervention_from_json(j, "command", {"id", "type"})};
  } else if (type == "reset_habits") {
    only_keys(j, {"id", "type"});
    cmd.body = ResetHabitsCommand{};
  } else if (type == "snapshot_request") {
    only_keys(j, {"id", "type", "view"});
    const json& v = json_util::member(j, "view", "command");
    std::optional<SnapshotView> view;
    if (v.is_string()) view = parse_view(v.get<std::string>());
    if (!view) throw ValidationError("command.view: unknown view " + v.dump());
    cmd.body = SnapshotRequest{*view};
  } else if (type == "replay_log") {
    only_keys(j, {"id", "type"});
    cmd.body = ReplayLogRequest{};
  } else {
    throw ValidationError("command.type: unknown command '" + type + "'");
  }
  return cmd;
}

SteeringSession::SteeringSession(const CalibrationData& calib,
                                 SimConfig config, SteeringOptions options)
    : sim_(calib, config),
      initial_config_(config),
      options_(options),
      paused_(options.start_paused),
      speed_(options.initial_speed) {
  if (!(speed_ > 0.0 && speed_ <= kMaxTicksPerSecond)) {
    throw ValidationError("initial speed must lie in (0, 1000]");
  }
}

void SteeringSession::submit(std::string_view text) {
  std::optional<std::int64_t> id;
  try {
    ClientCommand cmd = parse_command(text, &id);
    {
      std::lock_guard lock(inbox_mu_);
      inbox_.push_back(std::move(cmd));
    }
    inbox_cv_.notify_all();
  } catch (const ValidationError& e) {
    emit_error(id, e.what());
  }
}

void SteeringSession::set_notifier(std::function<void()> notify) {
  std::lock_guard lock(outbox_mu_);
  notify_ = std::move(notify);
}

std::optional<json> SteeringSession::next_event() {
  std::lock_guard lock(outbox_mu_);
  if (outbox_.empty()) return std::nullopt;
  json e = std::move(outbox_.front().event);
  outbox_.pop_front();
  return e;
}

std::vector<json> SteeringSession::drain_events() {
  std::lock_guard lock(outbox_mu_);
  std::vector<json> out;
  out.reserve(outbox_.size());
  for (auto& o : outbox_) out.push_back(std::move(o.event));
  outbox_.clear();
  return out;
}

std::size_t SteeringSession::dropped_events() const {
  std::lock_guard lock(outbox_mu_);
  return dropped_;
}

void SteeringSession::emit(json event, bool droppable) {
  std::function<void()> notify;
  {
    std::lock_guard lock(outbox_mu_);
    if (droppable && outbox_.size() >= options_.outbox_capacity) {
      auto oldest = std::find_if(outbox_.begin(), outbox_.end(),
                                 [](const Outgoing& o) { return o.droppable; });
      if (oldest != outbox_.end()) {
        outbox_.erase(oldest);
        ++dropped_;
      }
    }
    outbox_.push_back({std::move(event), droppable});
    notify = notify_;
  }
  if (notify) notify();
}

void SteeringSession::emit_error(std::optional<std::int64_t> id,
                                 const std::string& message) {
  emit({{"type", "error"},
        {"id", id ? json(*id) : json(nullptr)},
        {"message", message}},
       false);
}

void SteeringSession::process_commands() {
  std::deque<ClientCommand> batch;
  {
    std::lock_guard lock(inbox_mu_);
    batch.swap(inbox_);
  }
  for (const ClientCommand& cmd : batch) handle(cmd);
}

void SteeringSession::handle(const ClientCommand& cmd) {
  const json ack{{"type", "ack"}, {"id", cmd.id}};
  try {
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, PauseCommand>) {
            paused_ = true;
          } else if constexpr (std::is_same_v<T, ResumeCommand>) {
            paused_ = false;
          } else if constexpr (std::is_same_v<T, StepCommand>) {
            pending_steps_ += body.n;
          } else if constexpr (std::is_same_v<T, SetSpeedCommand>) {
            speed_ = body.ticks_per_second;
          } else if constexpr (std::is_same_v<T, InterveneCommand>) {
            sim_.apply(body.action);
            log_.push_back({sim_.tick(), body.action});
          } else if constexpr (std::is_same_v<T, ResetHabitsCommand>) {
            sim_.apply(ResetHabits{});
            log_.push_back({sim_.tick(), ResetHabits{}});
          } else if constexpr (std::is_same_v<T, SnapshotRequest>) {
            emit({{"type", "state_view"},
                  {"id", cmd.id},
                  {"view", view_name(body.view)},
                  {"data", view(body.view)}},
                 false);
          } else {
            emit({{"type", "state_view"},
                  {"id", cmd.id},
                  {"view", "replay_log"},
                  {"data", replay_log().to_json()}},
                 false);
          }
        },
        cmd.body);
  } catch (const std::exception& e) {
    emit_error(cmd.id, e.what());
    return;
  }
  emit(ack, false);
}

bool SteeringSession::advance() {
  if (pending_steps_ > 0) {
    --pending_steps_;
  } else if (paused_) {
    return false;
  }
  last_metrics_ = sim_.step();
  json event = last_metrics_->to_json();
  event["type"] = "tick_metrics";
  emit(std::move(event), true);
  return true;
}

void SteeringSession::run(std::stop_token stop) {
  auto next_due = Clock::now();
  while (!stop.stop_requested()) {
    process_commands();
    if (pending_steps_ > 0) {
      advance();
      continue;
    }
    std::unique_lock lock(inbox_mu_);
    auto has_input = [this] { return !inbox_.empty(); };
    if (paused_) {
      inbox_cv_.wait(lock, stop, has_input);
      next_due = Clock::now();
      continue;
    }
    if (Clock::now() < next_due) {
      inbox_cv_.wait_until(lock, stop, next_due, has_input);
      continue;
    }
    lock.unlock();
    advance();
    const auto period = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / speed_));
    next_due = std::max(next_due + period, Clock::now() - period);
  }
}

json SteeringSession::view(SnapshotView v) const {
  switch (v) {
    case SnapshotView::kMetrics:
      return last_metrics_ ? last_metrics_->to_json() : sim_.observe().to_json();
    case SnapshotView::kLayout:
      return json_util::grid_to_json(sim_.layout());
    case SnapshotView::kAgents: {
      json agents = json::array();
      for (const Agent& a : sim_.agents()) {
        agents.push_back({{"id", a.id},
                          {"mode", to_string(a.current_mode)},
                          {"satisfaction", a.satisfaction},
                          {"distance", a.distance_km}});
      }
      return agents;
    }
    case SnapshotView::kPrioritiesHistogram: {
      // Agents grouped by current mode; one histogram per criterion.
      json by_mode = empty_histograms();
      for (const Agent& a : sim_.agents()) {
        json& row = by_mode[std::string(to_string(a.current_mode))];
        for (Criterion c : kAllCriteria) {
          auto& bins = row[std::string(to_string(c))];
          const std::size_t b = histogram_bin(a.priorities[c]);
          bins[b] = bins[b].get<std::size_t>() + 1;
        }
      }
      return {{"bins", kHistogramBins}, {"range", {kValueMin, kValueMax}},
              {"by_mode", std::move(by_mode)}};
    }
    case SnapshotView::kValuesHistogram: {
      // Every agent's perceived value of every (mode, criterion).
      json by_mode = empty_histograms();
      std::vector<std::array<std::size_t, kHistogramBins>> counts(
          kModeCount * kCriterionCount);
      for (const Agent& a : sim_.agents()) {
        const ModeGrid seen =
            perceive(sim_.layout(), a.filter, sim_.config().biases_enabled);
        for (std::size_t i = 0; i < counts.size(); ++i) {
          ++counts[i][histogram_bin(seen.cells()[i])];
        }
      }
      for (Mode m : kAllModes) {
        for (Criterion c : kAllCriteria) {
          const auto& bins = counts[index(m) * kCriterionCount + index(c)];
          by_mode[std::string(to_string(m))][std::string(to_string(c))] =
              std::vector<std::size_t>(bins.begin(), bins.end());
        }
      }
      return {{"bins", kHistogramBins}, {"range", {kValueMin, kValueMax}},
              {"by_mode", std::move(by_mode)}};
    }
  }
  return nullptr;
}

Scenario SteeringSession::replay_log() const {
  Scenario s;
  s.config.n_agents = initial_config_.n_agents;
  s.config.ticks = sim_.tick();
  s.config.seeds = {initial_config_.seed};
  s.config.biases = initial_config_.biases_enabled;
  s.config.habits = initial_config_.habits_enabled;
  for (const TimedIntervention& t : log_) {
    s.events.push_back({t.at, std::nullopt, std::nullopt, t.action});
  }
  return s;
}

}  // namespace modalsim
