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


#include "modalsim/calibration.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json_util.hpp"

namespace modalsim {
namespace {

using nlohmann::json;

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double sample_stdev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

PerMode<std::vector<const SurveyResponse*>> group_by_mode(
    const std::vector<SurveyResponse>& responses) {
  PerMode<std::vector<const SurveyResponse*>> groups;
  for (const auto& r : responses) groups[r.usual_mode].push_back(&r);
  return groups;
}

CriteriaVector criteria(std::initializer_list<double> xs) {
  CriteriaVector v;
  std::copy(xs.begin(), xs.end(), v.values.begin());
  return v;
}

}  // namespace

DistanceCaps default_distance_caps() {
  DistanceCaps caps;
  caps[Mode::kCar] = 195.0;
  caps[Mode::kBike] = 55.0;
  caps[Mode::kBus] = 100.0;
  caps[Mode::kWalk] = 10.0;
  return caps;
}

DistanceCaps parse_distance_caps(const std::string& spec) {
  DistanceCaps caps = default_distance_caps();
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::erase_if(item, [](unsigned char ch) { return std::isspace(ch); });
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("caps: expected mode=km, got '" + item + "'");
    }
    auto mode = parse_mode(item.substr(0, eq));
    if (!mode) throw ValidationError("caps: unknown mode in '" + item + "'");
    double km = 0.0;
    try {
      std::size_t used = 0;
      km = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("caps: bad number in '" + item + "'");
    }
    if (!(km > 0.0)) throw ValidationError("caps: must be positive: " + item);
    caps[*mode] = km;
  }
  return caps;
}

CleanResult clean_distances(const std::vector<SurveyResponse>& responses,
                            const DistanceCaps& caps) {
  CleanResult out;
  for (const auto& r : responses) {
    if (r.distance_km <= 0.0 || r.distance_km > caps[r.usual_mode]) {
      ++out.excluded[r.usual_mode];
    } else {
      out.kept.push_back(r);
    }
  }
  return out;
}

PerMode<DistanceStats> distance_stats(
    const std::vector<SurveyResponse>& responses) {
  PerMode<DistanceStats> out;
  const auto groups = group_by_mode(responses);
  for (Mode m : kAllModes) {
    if (groups[m].empty()) {
      throw ModelError("distance_stats: no responses for mode " +
                       std::string(to_string(m)));
    }
    std::vector<double> d;
    for (const auto* r : groups[m]) d.push_back(r->distance_km);
    DistanceStats& s = out[m];
    s.count = d.size();
    s.mean = mean_of(d);
    s.stdev = sample_stdev(d);
    s.min = *std::min_element(d.begin(), d.end());
    s.max = *std::max_element(d.begin(), d.end());
    s.median = median_of(d);
  }
  return out;
}

PerMode<AccessProbability> access_stats(
    const std::vector<SurveyResponse>& responses) {
  PerMode<AccessProbability> out;
  const auto groups = group_by_mode(responses);
  for (Mode m : kAllModes) {
    if (groups[m].empty()) continue;
    std::size_t no_car = 0;
    std::size_t no_bus = 0;
    for (const auto* r : groups[m]) {
      no_car += r->declared_inaccessible.contains(Mode::kCar) ? 1 : 0;
      no_bus += r->declared_inaccessible.contains(Mode::kBus) ? 1 : 0;
    }
    const auto n = static_cast<double>(groups[m].size());
    out[m].no_car = m == Mode::kCar ? 0.0 : static_cast<double>(no_car) / n;
    out[m].no_bus = m == Mode::kBus ? 0.0 : static_cast<double>(no_bus) / n;
  }
  return out;
}

PerMode<CriteriaVector> mean_priorities(
    const std::vector<SurveyResponse>& responses) {
  PerMode<CriteriaVector> out;
  const auto groups = group_by_mode(responses);
  for (Mode m : kAllModes) {
    if (groups[m].empty()) continue;
    for (Criterion c : kAllCriteria) {
      double total = 0.0;
      for (const auto* r : groups[m]) total += r->priorities[c];
      out[m][c] = 10.0 * total / static_cast<double>(groups[m].size());
    }
  }
  return out;
}

EvaluationMeans evaluation_means(
    const std::vector<SurveyResponse>& responses) {
  EvaluationMeans out;
  for (Mode m : kAllModes) {
    for (Criterion c : kAllCriteria) {
      std::vector<double> all;
      std::vector<double> users;
      std::vector<double> others;
      for (const auto& r : responses) {
        const double v = r.evaluations(m, c);
        all.push_back(v);
        (r.usual_mode == m ? users : others).push_back(v);
      }
      out.all(m, c) = mean_of(all);
      out.users(m, c) = mean_of(users);
      out.non_users(m, c) = mean_of(others);
    }
  }
  return out;
}

PerMode<ScoreStats> mode_score_stats(
    const std::vector<SurveyResponse>& responses) {
  PerMode<ScoreStats> out;
  for (Mode m : kAllModes) {
    std::vector<double> all;
    std::vector<double> users;
    std::vector<double> others;
    for (const auto& r : responses) {
      const double total = r.priorities.sum();
      if (!(total > 0.0)) continue;
      double weighted = 0.0;
      for (Criterion c : kAllCriteria) {
        weighted += r.evaluations(m, c) * r.priorities[c];
      }
      const double s = weighted / total;
      all.push_back(s);
      (r.usual_mode == m ? users : others).push_back(s);
    }
    out[m].mean = mean_of(all);
    out[m].stdev = sample_stdev(all);
    out[m].median = median_of(all);
    out[m].users_mean = mean_of(users);
    out[m].non_users_mean = mean_of(others);
  }
  return out;
}

Prototypes filter_prototypes(const std::vector<SurveyResponse>& responses) {
  ModeGrid medians;
  for (Mode m : kAllModes) {
    for (Criterion c : kAllCriteria) {
      std::vector<double> v;
      v.reserve(responses.size());
      for (const auto& r : responses) v.push_back(r.evaluations(m, c));
      medians(m, c) = median_of(std::move(v));
    }
  }

  const auto groups = group_by_mode(responses);
  Prototypes out;
  for (Mode g : kAllModes) {
    ModeGrid& proto = out[g];
    for (Mode m : kAllModes) {
      for (Criterion c : kAllCriteria) {
        if (groups[g].empty() || medians(m, c) == 0.0) {
          proto(m, c) = 1.0;
          continue;
        }
        double total = 0.0;
        for (const auto* r : groups[g]) total += r->evaluations(m, c);
        const double mean = total / static_cast<double>(groups[g].size());
        proto(m, c) = std::clamp(mean / medians(m, c), kFilterMin, kFilterMax);
      }
    }
  }
  return out;
}

ModeGrid objective_layout(const std::vector<SurveyResponse>& responses,
                          const PerMode<double>& national_shares) {
  const auto groups = group_by_mode(responses);
  ModeGrid layout;
  for (Mode g : kAllModes) {
    if (national_shares[g] == 0.0) continue;
    if (groups[g].empty()) {
      throw ModelError("objective_layout: no responses for mode " +
                       std::string(to_string(g)));
    }
    for (Mode m : kAllModes) {
      for (Criterion c : kAllCriteria) {
        std::vector<double> v;
        for (const auto* r : groups[g]) v.push_back(r->evaluations(m, c));
        layout(m, c) += national_shares[g] * median_of(std::move(v));
      }
    }
  }
  for (double& v : layout.cells()) v = std::clamp(10.0 * v, kValueMin, kValueMax);
  return layout;
}

PerMode<double> default_national_shares() {
  // The published percentages add up to 98; rescale them to a distribution.
  PerMode<double> s;
  s[Mode::kCar] = 74.0 / 98.0;
  s[Mode::kBike] = 2.0 / 98.0;
  s[Mode::kBus] = 16.0 / 98.0;
  s[Mode::kWalk] = 6.0 / 98.0;
  return s;
}

void CalibrationData::validate() const {
  double total = 0.0;
  for (Mode m : kAllModes) {
    if (!(national_shares[m] >= 0.0)) {
      throw ValidationError("calibration: negative share for " +
                            std::string(to_string(m)));
    }
    total += national_shares[m];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("calibration: national shares must sum to 1");
  }
  for (Mode m : kAllModes) {
    const std::string name(to_string(m));
    if (!prototypes[m].within(kFilterMin, kFilterMax)) {
      throw ValidationError("calibration: prototype " + name +
                            " outside [0.5, 1.95]");
    }
    const auto& prio = mean_priorities[m];
    for (double p : prio.values) {
      if (!(p >= kValueMin && p <= kValueMax)) {
        throw ValidationError("calibration: priority for " + name +
                              " outside [0, 100]");
      }
    }
    if (!(prio.sum() > 0.0)) {
      throw ValidationError("calibration: degenerate priorities for " + name);
    }
    const auto& d = distance_stats[m];
    if (!(d.mean > 0.0) || !(d.stdev >= 0.0)) {
      throw ValidationError("calibration: bad distance statistics for " + name);
    }
    const auto& a = access_prob[m];
    if (!(a.no_car >= 0.0 && a.no_car <= 1.0 && a.no_bus >= 0.0 &&
          a.no_bus <= 1.0)) {
      throw ValidationError("calibration: access probability for " + name +
                            " outside [0, 1]");
    }
  }
  if (!objective_layout.within(kValueMin, kValueMax)) {
    throw ValidationError("calibration: objective layout outside [0, 100]");
  }
}

json CalibrationData::to_json() const {
  using namespace json_util;
  json j;
  j["national_shares"] = number_map(national_shares);
  j["mean_priorities"] = per_mode_to_json(mean_priorities, criteria_to_json);
  j["distance_stats"] =
      per_mode_to_json(distance_stats, [](const DistanceStats& s) {
        return json{{"mean", s.mean},     {"stdev", s.stdev},
                    {"min", s.min},       {"max", s.max},
                    {"median", s.median}, {"count", s.count}};
      });
  j["access_prob"] =
      per_mode_to_json(access_prob, [](const AccessProbability& a) {
        return json{{"no_car", a.no_car}, {"no_bus", a.no_bus}};
      });
  j["prototypes"] = per_mode_to_json(prototypes, grid_to_json);
  j["objective_layout"] = grid_to_json(objective_layout);
  j["provenance"] = {
      {"source", provenance.source},
      {"row_counts",
       {{"read", provenance.rows_read},
        {"dropped", provenance.rows_dropped},
        {"retained", provenance.rows_retained}}},
      {"exclusions",
       per_mode_to_json(provenance.exclusions,
                        [](std::size_t n) { return n; })},
      {"notes", provenance.notes},
  };
  return j;
}

CalibrationData CalibrationData::from_json(const json& j) {
  using namespace json_util;
  const std::string root = "calibration";
  expect_keys(j,
              {"national_shares", "mean_priorities", "distance_stats",
               "access_prob", "prototypes", "objective_layout", "provenance"},
              root);
  auto count = [](const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) {
      throw ValidationError(path + ": expected non-negative integer");
    }
    return v.get<std::size_t>();
  };

  CalibrationData d;
  d.national_shares = number_map_from_json(
      member(j, "national_shares", root), root + ".national_shares");
  d.mean_priorities = per_mode_from_json<CriteriaVector>(
      member(j, "mean_priorities", root), root + ".mean_priorities",
      criteria_from_json);
  d.distance_stats = per_mode_from_json<DistanceStats>(
      member(j, "distance_stats", root), root + ".distance_stats",
      [&](const json& v, const std::string& path) {
        expect_keys(v, {"mean", "stdev", "min", "max", "median", "count"},
                    path);
        DistanceStats s;
        s.mean = number(member(v, "mean", path), path + ".mean");
        s.stdev = number(member(v, "stdev", path), path + ".stdev");
        s.min = number(member(v, "min", path), path + ".min");
        s.max = number(member(v, "max", path), path + ".max");
        s.median = number(member(v, "median", path), path + ".median");
        s.count = count(member(v, "count", path), path + ".count");
        return s;
      });
  d.access_prob = per_mode_from_json<AccessProbability>(
      member(j, "access_prob", root), root + ".access_prob",
      [](const json& v, const std::string& path) {
        expect_keys(v, {"no_car", "no_bus"}, path);
        AccessProbability a;
        a.no_car = number(member(v, "no_car", path), path + ".no_car");
        a.no_bus = number(member(v, "no_bus", path), path + ".no_bus");
        return a;
      });
  d.prototypes = per_mode_from_json<ModeGrid>(
      member(j, "prototypes", root), root + ".prototypes", grid_from_json);
  d.objective_layout = grid_from_json(member(j, "objective_layout", root),
                                      root + ".objective_layout");

  if (auto it = j.find("provenance"); it != j.end()) {
    const std::string path = root + ".provenance";
    expect_keys(*it, {"source", "row_counts", "exclusions", "notes"}, path);
    Provenance& p = d.provenance;
    if (auto s = it->find("source"); s != it->end()) p.source = s->get<std::string>();
    if (auto rc = it->find("row_counts"); rc != it->end()) {
      expect_keys(*rc, {"read", "dropped", "retained"}, path + ".row_counts");
      p.rows_read = count(member(*rc, "read", path), path + ".row_counts.read");
      p.rows_dropped =
          count(member(*rc, "dropped", path), path + ".row_counts.dropped");
      p.rows_retained =
          count(member(*rc, "retained", path), path + ".row_counts.retained");
    }
    if (auto ex = it->find("exclusions"); ex != it->end()) {
      p.exclusions = per_mode_from_json<std::size_t>(*ex, path + ".exclusions",
                                                     count);
    }
    if (auto notes = it->find("notes"); notes != it->end()) {
      p.notes = notes->get<std::vector<std::string>>();
    }
  }
  d.validate();
  return d;
}

CalibrationData calibrate(const SurveyParseResult& parsed,
                          const DistanceCaps& caps,
                          const PerMode<double>& national_shares,
                          const std::string& source) {
  const auto& all = parsed.responses;
  const CleanResult cleaned = clean_distances(all, caps);

  CalibrationData d;
  d.national_shares = national_shares;
  // Only the distance table is computed on the cleaned rows; the aberrant
  // distances say nothing about the ratings.
  d.distance_stats = distance_stats(cleaned.kept);
  d.mean_priorities = mean_priorities(all);
  d.access_prob = access_stats(all);
  d.prototypes = filter_prototypes(all);
  d.objective_layout = objective_layout(all, national_shares);
  d.provenance.source = source;
  d.provenance.rows_read = parsed.rows_read;
  d.provenance.rows_dropped = parsed.rows_dropped;
  d.provenance.rows_retained = all.size();
  d.provenance.exclusions = cleaned.excluded;
  d.validate();
  return d;
}

const CalibrationData& default_calibration() {
  static const CalibrationData data = [] {
    CalibrationData d;
    d.national_shares = default_national_shares();

    // Mean priorities per usual mode (0-10).
    d.mean_priorities[Mode::kCar] = criteria({5.65, 7.19, 5.63, 8.57, 7.79, 6.72});
    d.mean_priorities[Mode::kBike] = criteria({8.3, 7.31, 7.08, 8.54, 7.68, 5.37});
    d.mean_priorities[Mode::kBus] = criteria({6.76, 6.75, 7.44, 7.81, 7.37, 6.46});
    d.mean_priorities[Mode::kWalk] = criteria({7.27, 7.35, 7.58, 8.42, 6.7, 6.67});
    for (Mode m : kAllModes) {
      for (double& p : d.mean_priorities[m].values) p *= 10.0;
    }

    // Distances in km: mean, stdev, min, max, median, retained count.
    d.distance_stats[Mode::kCar] = {21.29, 23.1, 2.0, 190.0, 15.0, 131};
    d.distance_stats[Mode::kBike] = {6.43, 6.68, 1.0, 50.0, 5.0, 199};
    d.distance_stats[Mode::kBus] = {11.16, 13.59, 1.0, 95.0, 5.55, 220};
    d.distance_stats[Mode::kWalk] = {1.80, 1.44, 0.2, 9.0, 1.5, 78};

    d.access_prob[Mode::kCar] = {0.0, 0.6119};
    d.access_prob[Mode::kBike] = {0.299, 0.1029};
    d.access_prob[Mode::kBus] = {0.5746, 0.0};
    d.access_prob[Mode::kWalk] = {0.50, 0.0833};

    // Mean evaluations (0-10): all respondents, users, non-users.
    PerMode<CriteriaVector> all;
    PerMode<CriteriaVector> users;
    PerMode<CriteriaVector> others;
    all[Mode::kBike] = criteria({9.21, 6.03, 7.74, 6.63, 6.6, 4.62});
    users[Mode::kBike] = criteria({9.56, 7.39, 8.54, 8.23, 7.98, 5.38});
    others[Mode::kBike] = criteria({9.05, 5.4, 7.37, 5.9, 5.96, 4.28});
    all[Mode::kCar] = criteria({1.81, 7.69, 2.68, 6.32, 6.76, 7.29});
    users[Mode::kCar] = criteria({2.52, 8.51, 3.84, 8.32, 8.21, 7.69});
    others[Mode::kCar] = criteria({1.63, 7.47, 2.38, 5.81, 6.38, 7.19});
    all[Mode::kBus] = criteria({7.43, 5.83, 6.87, 5.78, 5.57, 7.46});
    users[Mode::kBus] = criteria({7.77, 6.46, 7.25, 7.2, 6.81, 7.37});
    others[Mode::kBus] = criteria({7.25, 5.49, 6.66, 5.0, 4.91, 7.5});
    all[Mode::kWalk] = criteria({9.81, 6.7, 9.75, 5.99, 2.98, 6.77});
    users[Mode::kWalk] = criteria({9.74, 8.12, 9.79, 8.01, 4.96, 7.12});
    others[Mode::kWalk] = criteria({9.83, 6.49, 9.74, 5.69, 2.69, 6.72});

    // Only each group's deviation on its own mode is published; the other
    // rows of its prototype stay neutral.
    for (Mode g : kAllModes) {
      d.prototypes[g] = ModeGrid::filled(1.0);
      for (Criterion c : kAllCriteria) {
        d.prototypes[g](g, c) =
            std::clamp(users[g][c] / all[g][c], kFilterMin, kFilterMax);
      }
    }
    for (Mode m : kAllModes) {
      const double share = d.national_shares[m];
      for (Criterion c : kAllCriteria) {
        d.objective_layout(m, c) =
            10.0 * (share * users[m][c] + (1.0 - share) * others[m][c]);
      }
    }

    d.provenance.source = "embedded";
    d.provenance.rows_read = 650;
    d.provenance.rows_retained = 650;
    d.provenance.exclusions[Mode::kCar] = 3;
    d.provenance.exclusions[Mode::kBike] = 5;
    d.provenance.exclusions[Mode::kBus] = 8;
    d.provenance.exclusions[Mode::kWalk] = 6;
    d.provenance.notes = {
        "approximation: group medians replaced by group means",
        "approximation: prototypes only carry each group's deviation on its "
        "own mode; other modes are seen unfiltered",
        "approximation: a group's rating of another mode in the layout is "
        "that mode's non-user mean"};
    d.validate();
    return d;
  }();
  return data;
}

}  // namespace modalsim
