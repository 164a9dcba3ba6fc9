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

// Discrete-time simulation of a population of agents over a shared layout.
//
// Random draws are taken from a single engine in a fixed order: agents are
// visited by ascending id and each consumes exactly two uniforms per tick,
// first the habit-break event draw and then the habit draw. Both draws are
// taken whether or not they end up being used, so toggling biases or habits
// never shifts the stream.

#ifndef MODALSIM_ENGINE_HPP_
#define MODALSIM_ENGINE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "modalsim/calibration.hpp"
#include "modalsim/model.hpp"
#include "modalsim/rng.hpp"

namespace modalsim {

struct SimConfig {
  std::size_t n_agents = 200;
  std::uint64_t seed = 0;
  bool biases_enabled = true;
  bool habits_enabled = true;
  double event_probability = 0.01;
  std::size_t window_capacity = kDefaultWindowCapacity;
  double walk_max_km = 7.0;
  double bike_max_km = 15.0;

  void validate() const;
  Reach reach() const { return {walk_max_km, bike_max_km}; }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Interventions: edits applied between ticks.
struct SetValue {
  Mode mode;
  Criterion criterion;
  double value;
  friend bool operator==(const SetValue&, const SetValue&) = default;
};
struct AdjustValue {
  Mode mode;
  Criterion criterion;
  double delta;
  friend bool operator==(const AdjustValue&, const AdjustValue&) = default;
};
// Shifts one priority of every agent, clamped to [0, 100].
struct ShiftPriority {
  Criterion criterion;
  double delta;
  friend bool operator==(const ShiftPriority&, const ShiftPriority&) = default;
};
enum class ToggleTarget { kBiases, kHabits };
struct Toggle {
  ToggleTarget target;
  bool enabled;
  friend bool operator==(const Toggle&, const Toggle&) = default;
};
struct ResetHabits {
  friend bool operator==(const ResetHabits&, const ResetHabits&) = default;
};

using Intervention =
    std::variant<SetValue, AdjustValue, ShiftPriority, Toggle, ResetHabits>;

// Flat JSON form: {"action": "adjust_value", "mode": "bike",
// "criterion": "safety", "delta": 5}. Toggles use "target" and a boolean
// "value".
nlohmann::json intervention_to_json(const Intervention& iv);

// `extra_keys` are tolerated alongside the intervention fields (the scenario
// and steering envelopes carry their own). Errors name `path`.
Intervention intervention_from_json(
    const nlohmann::json& j, const std::string& path,
    const std::vector<std::string>& extra_keys = {});

struct DecisionCounts {
  std::size_t by_habit = 0;
  std::size_t habit_contrary = 0;
  std::size_t biased = 0;
  std::size_t constrained = 0;

  friend bool operator==(const DecisionCounts&, const DecisionCounts&) =
      default;
};

struct MetricsSnapshot {
  std::uint64_t tick = 0;
  PerMode<double> shares{};
  // Absent for modes with no current users.
  PerMode<std::optional<double>> satisfaction{};
  DecisionCounts counts;

  nlohmann::json to_json() const;

  friend bool operator==(const MetricsSnapshot&, const MetricsSnapshot&) =
      default;
};

class Simulation {
 public:
  // Throws ValidationError("empty population") when n_agents is zero.
  Simulation(const CalibrationData& calib, SimConfig config);

  // Runs one tick and returns its metrics; the returned tick number is the
  // tick count after the step (1 for the first step).
  MetricsSnapshot step();

  // Takes effect from the next step.
  void apply(const Intervention& intervention);

  // Empties every trip window. Filters are kept.
  void reset_habits();

  // Shares and satisfaction of the current state, with zero counts.
  MetricsSnapshot observe() const;

  std::uint64_t tick() const { return tick_; }
  const SimConfig& config() const { return config_; }
  const ModeGrid& layout() const { return layout_; }
  const Prototypes& prototypes() const { return prototypes_; }
  const std::vector<Agent>& agents() const { return agents_; }
  // Decisions from the most recent step, indexed like agents().
  const std::vector<Decision>& last_decisions() const { return decisions_; }
  // Totals since construction.
  const DecisionCounts& cumulative() const { return cumulative_; }
  std::size_t forced_retentions() const { return forced_; }

  nlohmann::json to_json() const;
  static Simulation from_json(const nlohmann::json& j);

 private:
  Simulation() = default;

  SimConfig config_;
  std::uint64_t tick_ = 0;
  ModeGrid layout_;
  Prototypes prototypes_{};
  std::vector<Agent> agents_;
  std::vector<Decision> decisions_;
  DecisionCounts cumulative_;
  std::size_t forced_ = 0;
  Rng rng_;
};

}  // namespace modalsim

#endif  // MODALSIM_ENGINE_HPP_
