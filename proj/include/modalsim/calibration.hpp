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

// Calibration statistics computed from survey responses, and the
// CalibrationData bundle that seeds a simulation.
//
// Survey ratings are 0-10; everything stored in CalibrationData that feeds
// the simulator (priorities, layout) is on the 0-100 scale.

#ifndef MODALSIM_CALIBRATION_HPP_
#define MODALSIM_CALIBRATION_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modalsim/survey.hpp"
#include "modalsim/types.hpp"

namespace modalsim {

// Per-mode upper bound on plausible home-work distance, in km.
using DistanceCaps = PerMode<double>;

// Car 195, Bike 55, Bus 100, Walk 10.
DistanceCaps default_distance_caps();

// Parses "walk=10,bike=55,car=195,bus=100". Unlisted modes keep defaults.
DistanceCaps parse_distance_caps(const std::string& spec);

struct CleanResult {
  std::vector<SurveyResponse> kept;
  PerMode<std::size_t> excluded{};
};

// Drops responses whose distance is <= 0 or above the cap for their usual
// mode.
CleanResult clean_distances(const std::vector<SurveyResponse>& responses,
                            const DistanceCaps& caps);

struct DistanceStats {
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation; 0 for one response
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  std::size_t count = 0;

  friend bool operator==(const DistanceStats&, const DistanceStats&) = default;
};

// Throws ModelError naming the mode when a usual-mode group is empty.
PerMode<DistanceStats> distance_stats(
    const std::vector<SurveyResponse>& responses);

struct AccessProbability {
  double no_car = 0.0;
  double no_bus = 0.0;

  friend bool operator==(const AccessProbability&,
                         const AccessProbability&) = default;
};

// Fraction of each usual-mode group declaring car / bus inaccessible. Car
// users cannot lack a car and bus users cannot lack the bus.
PerMode<AccessProbability> access_stats(
    const std::vector<SurveyResponse>& responses);

// Group means of each priority, x10.
PerMode<CriteriaVector> mean_priorities(
    const std::vector<SurveyResponse>& responses);

// Mean evaluation grids (0-10 scale): over everyone, and for each mode over
// its users and its non-users.
struct EvaluationMeans {
  ModeGrid all;
  ModeGrid users;
  ModeGrid non_users;
};
EvaluationMeans evaluation_means(const std::vector<SurveyResponse>& responses);

// Per-respondent mode scores (normalised weighted sum, 0-10 scale)
// summarised per mode.
struct ScoreStats {
  double mean = 0.0;
  double stdev = 0.0;
  double median = 0.0;
  double users_mean = 0.0;
  double non_users_mean = 0.0;
};
PerMode<ScoreStats> mode_score_stats(
    const std::vector<SurveyResponse>& responses);

// prototype_g(m, c) = mean evaluation of (m, c) among group g, divided by
// the median over all responses, clamped to [0.5, 1.95]. A zero median, or
// an empty group, yields a factor of 1.
Prototypes filter_prototypes(const std::vector<SurveyResponse>& responses);

// layout(m, c) = 10 * sum_g share(g) * median over group g of eval(m, c).
ModeGrid objective_layout(const std::vector<SurveyResponse>& responses,
                          const PerMode<double>& national_shares);

// Bike 2%, car 74%, bus 16%, walk 6%, rescaled to sum to one.
PerMode<double> default_national_shares();

struct Provenance {
  std::string source;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::size_t rows_retained = 0;
  PerMode<std::size_t> exclusions{};
  std::vector<std::string> notes;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CalibrationData {
  PerMode<double> national_shares{};
  PerMode<CriteriaVector> mean_priorities{};
  PerMode<DistanceStats> distance_stats{};
  PerMode<AccessProbability> access_prob{};
  Prototypes prototypes{};
  ModeGrid objective_layout;
  Provenance provenance;

  // Throws ValidationError on shares not summing to 1, out-of-range
  // prototypes/layout, or non-positive priority sums.
  void validate() const;

  nlohmann::json to_json() const;
  static CalibrationData from_json(const nlohmann::json& j);

  friend bool operator==(const CalibrationData&, const CalibrationData&) =
      default;
};

// Full pipeline from parsed responses. Distance statistics use the rows that
// pass the caps; everything else uses every parsed row.
CalibrationData calibrate(const SurveyParseResult& parsed,
                          const DistanceCaps& caps = default_distance_caps(),
                          const PerMode<double>& national_shares =
                              default_national_shares(),
                          const std::string& source = "survey");

// Calibration transcribed from the published summary tables, so the
// simulator runs without the raw dataset. Medians are approximated by
// means; each prototype only filters its group's own mode, and the layout
// uses the non-user mean as the other groups' view.
const CalibrationData& default_calibration();

}  // namespace modalsim

#endif  // MODALSIM_CALIBRATION_HPP_
