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


#include "modalsim/population.hpp"

#include <algorithm>
#include <cmath>

namespace modalsim {
namespace {

constexpr double kMinDistanceKm = 0.1;
constexpr double kMaxDistanceKm = 200.0;
constexpr int kMaxDistanceDraws = 100000;

}  // namespace

PerMode<std::size_t> allocate_counts(std::size_t n,
                                     const PerMode<double>& shares) {
  PerMode<std::size_t> counts;
  PerMode<double> remainder;
  std::size_t assigned = 0;
  for (Mode m : kAllModes) {
    const double exact = static_cast<double>(n) * shares[m];
    const double whole = std::floor(exact);
    counts[m] = static_cast<std::size_t>(whole);
    remainder[m] = exact - whole;
    assigned += counts[m];
  }
  while (assigned < n) {
    Mode pick = Mode::kCar;
    for (Mode m : kAllModes) {
      if (remainder[m] > remainder[pick]) pick = m;
    }
    ++counts[pick];
    remainder[pick] = -1.0;
    ++assigned;
  }
  while (assigned > n) {
    // Only reachable when the shares sum above one.
    Mode pick = Mode::kCar;
    for (Mode m : kAllModes) {
      if (counts[m] > counts[pick]) pick = m;
    }
    --counts[pick];
    --assigned;
  }
  return counts;
}

Agent sample_agent(Mode mode, const CalibrationData& calib, Rng& rng,
                   std::int64_t id, const Reach& reach,
                   std::size_t window_capacity) {
  Agent a;
  a.id = id;
  a.current_mode = mode;

  for (Criterion c : kAllCriteria) {
    const double factor = 0.8 + 0.4 * uniform01(rng);
    a.priorities[c] = std::clamp(calib.mean_priorities[mode][c] * factor,
                                 kValueMin, kValueMax);
  }

  const DistanceStats& ds = calib.distance_stats[mode];
  double upper = kMaxDistanceKm;
  if (mode == Mode::kWalk) upper = reach.walk_max_km;
  if (mode == Mode::kBike) upper = reach.bike_max_km;
  std::normal_distribution<double> normal(ds.mean,
                                          ds.stdev > 0.0 ? ds.stdev : 1e-12);
  double d = 0.0;
  int draws = 0;
  do {
    if (++draws > kMaxDistanceDraws) {
      throw ModelError("sample_agent: distance distribution for " +
                       std::string(to_string(mode)) +
                       " never yields a reachable distance");
    }
    d = normal(rng);
    // Reachable modes need a strict inequality; the catch-all bound is
    // inclusive.
  } while (!(d > kMinDistanceKm) ||
           (upper == kMaxDistanceKm ? d > upper : d >= upper));
  a.distance_km = d;

  const AccessProbability& ap = calib.access_prob[mode];
  const bool has_car = uniform01(rng) >= ap.no_car;
  const bool has_bus = uniform01(rng) >= ap.no_bus;
  a.access_car = mode == Mode::kCar || has_car;
  a.access_bus = mode == Mode::kBus || has_bus;

  a.trips = TripWindow::filled(mode, window_capacity);
  a.filter = calib.prototypes[mode];
  a.satisfaction = score(perceive(calib.objective_layout, a.filter, true),
                         a.priorities, mode);
  return a;
}

std::vector<Agent> sample_population(std::size_t n,
                                     const PerMode<double>& shares,
                                     const CalibrationData& calib, Rng& rng,
                                     const Reach& reach,
                                     std::size_t window_capacity) {
  const PerMode<std::size_t> counts = allocate_counts(n, shares);
  std::vector<Agent> agents;
  agents.reserve(n);
  std::int64_t id = 0;
  for (Mode m : kAllModes) {
    for (std::size_t i = 0; i < counts[m]; ++i) {
      agents.push_back(sample_agent(m, calib, rng, id++, reach, window_capacity));
    }
  }
  return agents;
}

}  // namespace modalsim
