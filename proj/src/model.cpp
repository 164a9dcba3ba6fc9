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


#include "modalsim/model.hpp"

#include <algorithm>

namespace modalsim {

TripWindow::TripWindow(std::size_t capacity) : ring_(capacity) {
  if (capacity == 0) throw ModelError("trip window capacity must be positive");
}

TripWindow TripWindow::filled(Mode mode, std::size_t capacity) {
  TripWindow w(capacity);
  for (std::size_t i = 0; i < capacity; ++i) w.push(mode);
  return w;
}

void TripWindow::push(Mode mode) {
  if (size_ == ring_.size()) {
    --counts_[ring_[head_]];
    ring_[head_] = mode;
    head_ = (head_ + 1) % ring_.size();
  } else {
    ring_[(head_ + size_) % ring_.size()] = mode;
    ++size_;
  }
  ++counts_[mode];
}

void TripWindow::clear() {
  head_ = 0;
  size_ = 0;
  counts_ = {};
}

std::vector<Mode> TripWindow::entries() const {
  std::vector<Mode> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    out.push_back(ring_[(head_ + i) % ring_.size()]);
  }
  return out;
}

std::optional<Mode> Agent::usual_mode() const {
  if (trips.empty()) return std::nullopt;
  Mode best = Mode::kCar;
  for (Mode m : kAllModes) {
    if (trips.count(m) > trips.count(best)) best = m;
  }
  return best;
}

ModeSet available_modes(double distance_km, bool access_bus, bool access_car,
                        std::optional<Mode> blocked, const Reach& reach) {
  ModeSet out;
  if (access_car) out.insert(Mode::kCar);
  if (distance_km < reach.bike_max_km) out.insert(Mode::kBike);
  if (access_bus) out.insert(Mode::kBus);
  if (distance_km < reach.walk_max_km) out.insert(Mode::kWalk);
  if (blocked) out.erase(*blocked);
  return out;
}

ModeGrid perceive(const ModeGrid& objective, const ModeGrid& filter,
                  bool biases_enabled) {
  if (!biases_enabled) return objective;
  ModeGrid out;
  for (std::size_t i = 0; i < out.cells().size(); ++i) {
    out.cells()[i] = std::clamp(objective.cells()[i] * filter.cells()[i],
                                kValueMin, kValueMax);
  }
  return out;
}

double score(const ModeGrid& values, const CriteriaVector& priorities,
             Mode mode) {
  const double total = priorities.sum();
  if (!(total > 0.0)) throw ModelError("degenerate priorities");
  double weighted = 0.0;
  for (Criterion c : kAllCriteria) weighted += values(mode, c) * priorities[c];
  return weighted / total;
}

Scores score_all(const ModeGrid& values, const CriteriaVector& priorities) {
  const double total = priorities.sum();
  if (!(total > 0.0)) throw ModelError("degenerate priorities");
  Scores out;
  for (Mode m : kAllModes) {
    double weighted = 0.0;
    for (Criterion c : kAllCriteria) weighted += values(m, c) * priorities[c];
    out[m] = weighted / total;
  }
  return out;
}

Mode best_of(const Scores& scores, ModeSet candidates) {
  std::optional<Mode> best;
  for (Mode m : kAllModes) {
    if (!candidates.contains(m)) continue;
    if (!best || scores[m] > scores[*best]) best = m;
  }
  if (!best) throw ModelError("no available mode");
  return *best;
}

Mode best_mode(const ModeGrid& values, const CriteriaVector& priorities,
               ModeSet candidates) {
  if (candidates.empty()) throw ModelError("no available mode");
  return best_of(score_all(values, priorities), candidates);
}

Frequencies habit_frequencies(const TripWindow& trips) {
  Frequencies f;
  if (trips.empty()) return f;
  const auto n = static_cast<double>(trips.size());
  for (Mode m : kAllModes) f[m] = static_cast<double>(trips.count(m)) / n;
  return f;
}

bool habit_triggers(const Frequencies& frequencies, double u) {
  double usual = frequencies[Mode::kCar];
  for (Mode m : kAllModes) usual = std::max(usual, frequencies[m]);
  return u < usual;
}

ModeGrid blend_filter(const Frequencies& frequencies,
                      const Prototypes& prototypes) {
  double mass = 0.0;
  for (Mode m : kAllModes) mass += frequencies[m];
  if (!(mass > 0.0)) throw ModelError("no habit mass");

  ModeGrid out;
  for (Mode k : kAllModes) {
    const double w = frequencies[k];
    if (w == 0.0) continue;
    const auto& proto = prototypes[k].cells();
    for (std::size_t i = 0; i < out.cells().size(); ++i) {
      out.cells()[i] += w * proto[i];
    }
  }
  // Rounding in the weighted sum can step just outside the prototype range.
  for (double& v : out.cells()) v = std::clamp(v, kFilterMin, kFilterMax);
  return out;
}

Decision decide(const Agent& agent, const ModeGrid& layout, Switches switches,
                std::optional<Mode> blocked, double u_habit,
                const Reach& reach) {
  Decision d;
  const ModeGrid subjective =
      perceive(layout, agent.filter, switches.biases);
  d.subjective_scores = score_all(subjective, agent.priorities);
  d.objective_scores = score_all(layout, agent.priorities);

  const ModeSet candidates = available_modes(
      agent.distance_km, agent.access_bus, agent.access_car, blocked, reach);
  if (candidates.empty()) {
    d.chosen = agent.current_mode;
    d.constrained = true;
    d.forced_retention = true;
    d.satisfaction = d.subjective_scores[d.chosen];
    return d;
  }

  const Mode rational = best_of(d.subjective_scores, candidates);
  d.constrained =
      !candidates.contains(best_of(d.subjective_scores, ModeSet::all()));

  const std::optional<Mode> usual = agent.usual_mode();
  if (switches.habits && usual && candidates.contains(*usual) &&
      habit_triggers(habit_frequencies(agent.trips), u_habit)) {
    d.chosen = *usual;
    d.by_habit = true;
    d.habit_contrary = d.chosen != rational;
  } else {
    d.chosen = rational;
    d.biased = d.chosen != best_of(d.objective_scores, candidates);
  }
  d.satisfaction = d.subjective_scores[d.chosen];
  return d;
}

void record_trip(Agent& agent, Mode chosen, const Prototypes& prototypes,
                 bool biases_enabled) {
  agent.trips.push(chosen);
  agent.current_mode = chosen;
  if (biases_enabled && !agent.trips.empty()) {
    agent.filter = blend_filter(habit_frequencies(agent.trips), prototypes);
  }
}

}  // namespace modalsim
