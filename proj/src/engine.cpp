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

#include "modalsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

#include "json_util.hpp"
#include "modalsim/population.hpp"

namespace modalsim {
namespace {

using nlohmann::json;

std::string_view toggle_name(ToggleTarget t) {
  return t == ToggleTarget::kBiases ? "biases" : "habits";
}

Mode mode_value(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (auto m = parse_mode(v.get<std::string>())) return *m;
  }
  throw ValidationError(path + ": unknown mode " + v.dump());
}

Criterion criterion_value(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (auto c = parse_criterion(v.get<std::string>())) return *c;
  }
  throw ValidationError(path + ": unknown criterion " + v.dump());
}

double finite_field(const json& j, const std::string& key,
                    const std::string& path) {
  const double v =
      json_util::number(json_util::member(j, key, path), path + "." + key);
  if (!std::isfinite(v)) {
    throw ValidationError(path + "." + key + ": not finite");
  }
  return v;
}

void check_fields(const json& j, const std::string& path,
                  std::vector<std::string> allowed,
                  const std::vector<std::string>& extra) {
  allowed.insert(allowed.end(), extra.begin(), extra.end());
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ValidationError(path + "." + k + ": unknown field");
    }
  }
}

bool bool_field(const json& j, const std::string& key,
                const std::string& path) {
  const json& v = json_util::member(j, key, path);
  if (!v.is_boolean()) throw ValidationError(path + "." + key + ": expected boolean");
  return v.get<bool>();
}

template <typename T>
T unsigned_field(const json& j, const std::string& key,
                 const std::string& path) {
  const json& v = json_util::member(j, key, path);
  if (!v.is_number_unsigned()) {
    throw ValidationError(path + "." + key + ": expected non-negative integer");
  }
  return v.get<T>();
}

json agent_to_json(const Agent& a) {
  json trips = json::array();
  for (Mode m : a.trips.entries()) trips.push_back(to_string(m));
  return {{"id", a.id},
          {"current_mode", to_string(a.current_mode)},
          {"satisfaction", a.satisfaction},
          {"distance_km", a.distance_km},
          {"access_bus", a.access_bus},
          {"access_car", a.access_car},
          {"priorities", json_util::criteria_to_json(a.priorities)},
          {"filter", json_util::grid_to_json(a.filter)},
          {"window_capacity", a.trips.capacity()},
          {"trips", std::move(trips)}};
}

Agent agent_from_json(const json& j, const std::string& path) {
  json_util::expect_keys(j,
                         {"id", "current_mode", "satisfaction", "distance_km",
                          "access_bus", "access_car", "priorities", "filter",
                          "window_capacity", "trips"},
                         path);
  Agent a;
  const json& id = json_util::member(j, "id", path);
  if (!id.is_number_integer()) throw ValidationError(path + ".id: expected integer");
  a.id = id.get<std::int64_t>();
  a.current_mode =
      mode_value(json_util::member(j, "current_mode", path), path + ".current_mode");
  a.satisfaction = finite_field(j, "satisfaction", path);
  a.distance_km = finite_field(j, "distance_km", path);
  a.access_bus = bool_field(j, "access_bus", path);
  a.access_car = bool_field(j, "access_car", path);
  a.priorities = json_util::criteria_from_json(
      json_util::member(j, "priorities", path), path + ".priorities");
  a.filter = json_util::grid_from_json(json_util::member(j, "filter", path),
                                       path + ".filter");
  a.trips = TripWindow(unsigned_field<std::size_t>(j, "window_capacity", path));
  const json& trips = json_util::member(j, "trips", path);
  if (!trips.is_array() || trips.size() > a.trips.capacity()) {
    throw ValidationError(path + ".trips: expected array within capacity");
  }
  for (std::size_t i = 0; i < trips.size(); ++i) {
    a.trips.push(mode_value(trips[i], path + ".trips[" + std::to_string(i) + "]"));
  }
  return a;
}

}  // namespace

void SimConfig::validate() const {
  if (n_agents == 0) throw ValidationError("empty population");
  if (!(event_probability >= 0.0 && event_probability <= 1.0)) {
    throw ValidationError("event_probability must lie in [0, 1]");
  }
  if (window_capacity == 0) {
    throw ValidationError("window_capacity must be positive");
  }
  if (!(walk_max_km > 0.0) || !(bike_max_km > 0.0)) {
    throw ValidationError("distance thresholds must be positive");
  }
}

json intervention_to_json(const Intervention& iv) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SetValue>) {
          return {{"action", "set_value"},
                  {"mode", to_string(x.mode)},
                  {"criterion", to_string(x.criterion)},
                  {"value", x.value}};
        } else if constexpr (std::is_same_v<T, AdjustValue>) {
          return {{"action", "adjust_value"},
                  {"mode", to_string(x.mode)},
                  {"criterion", to_string(x.criterion)},
                  {"delta", x.delta}};
        } else if constexpr (std::is_same_v<T, ShiftPriority>) {
          return {{"action", "shift_priority"},
                  {"criterion", to_string(x.criterion)},
                  {"delta", x.delta}};
        } else if constexpr (std::is_same_v<T, Toggle>) {
          return {{"action", "toggle"},
                  {"target", toggle_name(x.target)},
                  {"value", x.enabled}};
        } else {
          return {{"action", "reset_habits"}};
        }
      },
      iv);
}

Intervention intervention_from_json(const json& j, const std::string& path,
                                    const std::vector<std::string>& extra) {
  if (!j.is_object()) throw ValidationError(path + ": expected object");
  const json& action_json = json_util::member(j, "action", path);
  if (!action_json.is_string()) {
    throw ValidationError(path + ".action: expected string");
  }
  const auto action = action_json.get<std::string>();
  auto mode = [&] {
    return mode_value(json_util::member(j, "mode", path), path + ".mode");
  };
  auto criterion = [&] {
    return criterion_value(json_util::member(j, "criterion", path),
                           path + ".criterion");
  };

  if (action == "set_value") {
    check_fields(j, path, {"action", "mode", "criterion", "value"}, extra);
    return SetValue{mode(), criterion(), finite_field(j, "value", path)};
  }
  if (action == "adjust_value") {
    check_fields(j, path, {"action", "mode", "criterion", "delta"}, extra);
    return AdjustValue{mode(), criterion(), finite_field(j, "delta", path)};
  }
  if (action == "shift_priority") {
    check_fields(j, path, {"action", "criterion", "delta"}, extra);
    return ShiftPriority{criterion(), finite_field(j, "delta", path)};
  }
  if (action == "toggle") {
    check_fields(j, path, {"action", "target", "value"}, extra);
    const json& target = json_util::member(j, "target", path);
    ToggleTarget t;
    if (target == "biases") {
      t = ToggleTarget::kBiases;
    } else if (target == "habits") {
      t = ToggleTarget::kHabits;
    } else {
      throw ValidationError(path + ".target: unknown target " + target.dump());
    }
    const json& value = json_util::member(j, "value", path);
    bool on = false;
    if (value.is_boolean()) {
      on = value.get<bool>();
    } else if (value.is_number()) {
      on = value.get<double>() != 0.0;
    } else {
      throw ValidationError(path + ".value: expected boolean");
    }
    return Toggle{t, on};
  }
  if (action == "reset_habits") {
    check_fields(j, path, {"action"}, extra);
    return ResetHabits{};
  }
  throw ValidationError(path + ".action: unknown action '" + action + "'");
}

json MetricsSnapshot::to_json() const {
  json j;
  j["tick"] = tick;
  for (Mode m : kAllModes) {
    const std::string name(to_string(m));
    j["shares"][name] = shares[m];
    j["satisfaction"][name] =
        satisfaction[m] ? json(*satisfaction[m]) : json(nullptr);
  }
  j["counts"] = {{"by_habit", counts.by_habit},
                 {"habit_contrary", counts.habit_contrary},
                 {"biased", counts.biased},
                 {"constrained", counts.constrained}};
  return j;
}

Simulation::Simulation(const CalibrationData& calib, SimConfig config)
    : config_(config), rng_(config.seed) {
  config_.validate();
  calib.validate();
  layout_ = calib.objective_layout;
  prototypes_ = calib.prototypes;
  agents_ = sample_population(config_.n_agents, calib.national_shares, calib,
                              rng_, config_.reach(), config_.window_capacity);
  // Initial satisfaction uses the perception the configuration starts with.
  for (Agent& a : agents_) {
    a.satisfaction =
        score(perceive(layout_, a.filter, config_.biases_enabled),
              a.priorities, a.current_mode);
  }
}

MetricsSnapshot Simulation::step() {
  const Switches switches{config_.biases_enabled, config_.habits_enabled};
  const Reach reach = config_.reach();
  decisions_.resize(agents_.size());

  MetricsSnapshot snap;
  PerMode<std::size_t> users{};
  PerMode<double> satisfaction_sum{};

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Agent& agent = agents_[i];
    const double u_event = uniform01(rng_);
    const double u_habit = uniform01(rng_);

    std::optional<Mode> blocked;
    if (u_event < config_.event_probability) blocked = agent.usual_mode();

    const Decision d = decide(agent, layout_, switches, blocked, u_habit, reach);
    record_trip(agent, d.chosen, prototypes_, switches.biases);
    agent.satisfaction = d.satisfaction;
    decisions_[i] = d;

    snap.counts.by_habit += d.by_habit ? 1 : 0;
    snap.counts.habit_contrary += d.habit_contrary ? 1 : 0;
    snap.counts.biased += d.biased ? 1 : 0;
    snap.counts.constrained += d.constrained ? 1 : 0;
    forced_ += d.forced_retention ? 1 : 0;
    ++users[d.chosen];
    satisfaction_sum[d.chosen] += d.satisfaction;
  }

  ++tick_;
  snap.tick = tick_;
  const auto n = static_cast<double>(agents_.size());
  for (Mode m : kAllModes) {
    snap.shares[m] = static_cast<double>(users[m]) / n;
    if (users[m] > 0) {
      snap.satisfaction[m] =
          satisfaction_sum[m] / static_cast<double>(users[m]);
    }
  }
  cumulative_.by_habit += snap.counts.by_habit;
  cumulative_.habit_contrary += snap.counts.habit_contrary;
  cumulative_.biased += snap.counts.biased;
  cumulative_.constrained += snap.counts.constrained;
  return snap;
}

MetricsSnapshot Simulation::observe() const {
  MetricsSnapshot snap;
  snap.tick = tick_;
  PerMode<std::size_t> users{};
  PerMode<double> satisfaction_sum{};
  for (const Agent& a : agents_) {
    ++users[a.current_mode];
    satisfaction_sum[a.current_mode] += a.satisfaction;
  }
  const auto n = static_cast<double>(agents_.size());
  for (Mode m : kAllModes) {
    snap.shares[m] = static_cast<double>(users[m]) / n;
    if (users[m] > 0) {
      snap.satisfaction[m] =
          satisfaction_sum[m] / static_cast<double>(users[m]);
    }
  }
  return snap;
}

void Simulation::apply(const Intervention& intervention) {
  std::visit(
      [this](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SetValue>) {
          layout_(x.mode, x.criterion) =
              std::clamp(x.value, kValueMin, kValueMax);
        } else if constexpr (std::is_same_v<T, AdjustValue>) {
          double& v = layout_(x.mode, x.criterion);
          v = std::clamp(v + x.delta, kValueMin, kValueMax);
        } else if constexpr (std::is_same_v<T, ShiftPriority>) {
          // Reject the whole shift if it would leave any agent without a
          // positive priority.
          for (const Agent& a : agents_) {
            CriteriaVector p = a.priorities;
            p[x.criterion] =
                std::clamp(p[x.criterion] + x.delta, kValueMin, kValueMax);
            if (!(p.sum() > 0.0)) {
              throw ValidationError(
                  "shift_priority would leave an agent with degenerate "
                  "priorities");
            }
          }
          for (Agent& a : agents_) {
            double& p = a.priorities[x.criterion];
            p = std::clamp(p + x.delta, kValueMin, kValueMax);
          }
        } else if constexpr (std::is_same_v<T, Toggle>) {
          (x.target == ToggleTarget::kBiases ? config_.biases_enabled
                                             : config_.habits_enabled) =
              x.enabled;
        } else {
          reset_habits();
        }
      },
      intervention);
}

void Simulation::reset_habits() {
  for (Agent& a : agents_) a.trips.clear();
}

json Simulation::to_json() const {
  std::ostringstream rng_state;
  rng_state << rng_;
  json agents = json::array();
  for (const Agent& a : agents_) agents.push_back(agent_to_json(a));
  return {
      {"config",
       {{"n_agents", config_.n_agents},
        {"seed", config_.seed},
        {"biases_enabled", config_.biases_enabled},
        {"habits_enabled", config_.habits_enabled},
        {"event_probability", config_.event_probability},
        {"window_capacity", config_.window_capacity},
        {"walk_max_km", config_.walk_max_km},
        {"bike_max_km", config_.bike_max_km}}},
      {"tick", tick_},
      {"layout", json_util::grid_to_json(layout_)},
      {"prototypes",
       json_util::per_mode_to_json(prototypes_, json_util::grid_to_json)},
      {"agents", std::move(agents)},
      {"cumulative",
       {{"by_habit", cumulative_.by_habit},
        {"habit_contrary", cumulative_.habit_contrary},
        {"biased", cumulative_.biased},
        {"constrained", cumulative_.constrained},
        {"forced_retention", forced_}}},
      {"rng", rng_state.str()},
  };
}

Simulation Simulation::from_json(const json& j) {
  const std::string root = "state";
  json_util::expect_keys(j,
                         {"config", "tick", "layout", "prototypes", "agents",
                          "cumulative", "rng"},
                         root);
  Simulation sim;
  const json& cfg = json_util::member(j, "config", root);
  const std::string cpath = root + ".config";
  json_util::expect_keys(cfg,
                         {"n_agents", "seed", "biases_enabled",
                          "habits_enabled", "event_probability",
                          "window_capacity", "walk_max_km", "bike_max_km"},
                         cpath);
  sim.config_.n_agents = unsigned_field<std::size_t>(cfg, "n_agents", cpath);
  sim.config_.seed = unsigned_field<std::uint64_t>(cfg, "seed", cpath);
  sim.config_.biases_enabled = bool_field(cfg, "biases_enabled", cpath);
  sim.config_.habits_enabled = bool_field(cfg, "habits_enabled", cpath);
  sim.config_.event_probability = finite_field(cfg, "event_probability", cpath);
  sim.config_.window_capacity =
      unsigned_field<std::size_t>(cfg, "window_capacity", cpath);
  sim.config_.walk_max_km = finite_field(cfg, "walk_max_km", cpath);
  sim.config_.bike_max_km = finite_field(cfg, "bike_max_km", cpath);
  sim.config_.validate();

  sim.tick_ = unsigned_field<std::uint64_t>(j, "tick", root);
  sim.layout_ =
      json_util::grid_from_json(json_util::member(j, "layout", root), root + ".layout");
  sim.prototypes_ = json_util::per_mode_from_json<ModeGrid>(
      json_util::member(j, "prototypes", root), root + ".prototypes",
      json_util::grid_from_json);

  const json& agents = json_util::member(j, "agents", root);
  if (!agents.is_array() || agents.size() != sim.config_.n_agents) {
    throw ValidationError(root + ".agents: expected n_agents entries");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    sim.agents_.push_back(
        agent_from_json(agents[i], root + ".agents[" + std::to_string(i) + "]"));
  }

  const json& cum = json_util::member(j, "cumulative", root);
  const std::string kpath = root + ".cumulative";
  sim.cumulative_.by_habit = unsigned_field<std::size_t>(cum, "by_habit", kpath);
  sim.cumulative_.habit_contrary =
      unsigned_field<std::size_t>(cum, "habit_contrary", kpath);
  sim.cumulative_.biased = unsigned_field<std::size_t>(cum, "biased", kpath);
  sim.cumulative_.constrained =
      unsigned_field<std::size_t>(cum, "constrained", kpath);
  sim.forced_ = unsigned_field<std::size_t>(cum, "forced_retention", kpath);

  const json& rng = json_util::member(j, "rng", root);
  if (!rng.is_string()) throw ValidationError(root + ".rng: expected string");
  std::istringstream rng_state(rng.get<std::string>());
  rng_state >> sim.rng_;
  if (!rng_state) throw ValidationError(root + ".rng: malformed engine state");
  return sim;
}

}  // namespace modalsim
