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

// Declarative scenarios: a configuration plus a timeline of interventions,
// run across seeds and exported as per-tick time series.
//
// Scenario file:
//   {"config": {"n_agents": 200, "ticks": 400, "seeds": [1, 2],
//               "biases": true, "habits": true},
//    "events": [{"at": 0, "every": 20, "count": 10,
//                "action": "adjust_value", "mode": "bike",
//                "criterion": "safety", "delta": 5}]}
//
// An event due at tick t is applied before the step that produces the
// snapshot for tick t + 1.

#ifndef MODALSIM_SCENARIO_HPP_
#define MODALSIM_SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modalsim/calibration.hpp"
#include "modalsim/engine.hpp"

namespace modalsim {

struct ScenarioConfig {
  std::size_t n_agents = 200;
  std::uint64_t ticks = 400;
  std::vector<std::uint64_t> seeds{1};
  bool biases = true;
  bool habits = true;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) =
      default;
};

struct ScenarioEvent {
  std::uint64_t at = 0;
  std::optional<std::uint64_t> every;
  std::optional<std::uint64_t> count;
  Intervention action;

  friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

struct TimedIntervention {
  std::uint64_t at = 0;
  Intervention action;

  friend bool operator==(const TimedIntervention&, const TimedIntervention&) =
      default;
};

struct Scenario {
  ScenarioConfig config;
  std::vector<ScenarioEvent> events;

  // Throws ValidationError with the offending field path; unknown fields
  // are rejected.
  static Scenario parse(std::string_view text);
  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Repeated events expanded to at, at + every, ..., sorted by tick; events
  // due on the same tick keep their file order.
  std::vector<TimedIntervention> timeline() const;

  SimConfig sim_config(std::uint64_t seed) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct SeedRun {
  std::uint64_t seed = 0;
  MetricsSnapshot initial;
  std::vector<MetricsSnapshot> snapshots;
};

SeedRun run_seed(const Scenario& scenario, const CalibrationData& calib,
                 std::uint64_t seed);

// One run per configured seed, in the order the seeds are listed. Seeds run
// on up to `threads` workers (0 = hardware concurrency).
std::vector<SeedRun> run_scenario(const Scenario& scenario,
                                  const CalibrationData& calib,
                                  unsigned threads = 0);

enum class ExportFormat { kCsv, kJson };

// Columns: tick, share_{car,bike,bus,walk}, sat_{car,bike,bus,walk},
// n_by_habit, n_habit_contrary, n_biased, n_constrained. Satisfaction cells
// are empty (null in JSON) when a mode has no users.
void write_series(std::ostream& out,
                  const std::vector<MetricsSnapshot>& series,
                  ExportFormat format = ExportFormat::kCsv);

// Per-tick mean and sample standard deviation across seeds of every
// numeric column, as mean_<col>, sd_<col>.
void write_aggregate(std::ostream& out, const std::vector<SeedRun>& runs,
                     ExportFormat format = ExportFormat::kCsv);

// Writes <stem>_seed<k>.<ext> per seed and <stem>_aggregate.<ext>. Returns
// the paths written. Throws std::runtime_error when a file cannot be opened.
std::vector<std::filesystem::path> export_runs(
    const std::vector<SeedRun>& runs, const std::filesystem::path& out_dir,
    const std::string& stem, ExportFormat format = ExportFormat::kCsv);

}  // namespace modalsim

#endif  // MODALSIM_SCENARIO_HPP_
