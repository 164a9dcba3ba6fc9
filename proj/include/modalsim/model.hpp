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

// Agent state and the per-agent decision mathematics. Everything here is a
// pure function of its arguments; random draws are passed in explicitly.

#ifndef MODALSIM_MODEL_HPP_
#define MODALSIM_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "modalsim/types.hpp"

namespace modalsim {

inline constexpr std::size_t kDefaultWindowCapacity = 100;

// Bounded FIFO of the most recent modes used. Appending at capacity evicts
// the oldest entry. Per-mode counts are maintained incrementally.
class TripWindow {
 public:
  explicit TripWindow(std::size_t capacity = kDefaultWindowCapacity);

  // A window filled to capacity with `mode`.
  static TripWindow filled(Mode mode,
                           std::size_t capacity = kDefaultWindowCapacity);

  void push(Mode mode);
  void clear();

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return ring_.size(); }
  bool empty() const { return size_ == 0; }
  std::size_t count(Mode m) const { return counts_[m]; }

  // Oldest first.
  std::vector<Mode> entries() const;

  friend bool operator==(const TripWindow& a, const TripWindow& b) {
    return a.capacity() == b.capacity() && a.entries() == b.entries();
  }

 private:
  std::vector<Mode> ring_;
  std::size_t head_ = 0;  // index of the oldest entry
  std::size_t size_ = 0;
  PerMode<std::size_t> counts_{};
};

using Frequencies = PerMode<double>;
using Scores = PerMode<double>;

struct Agent {
  std::int64_t id = 0;
  Mode current_mode = Mode::kCar;
  double satisfaction = 0.0;
  double distance_km = 1.0;
  bool access_bus = true;
  bool access_car = true;
  CriteriaVector priorities;
  ModeGrid filter = ModeGrid::filled(1.0);
  TripWindow trips;

  // Most frequent mode in the trip window, canonical order on ties.
  std::optional<Mode> usual_mode() const;

  friend bool operator==(const Agent&, const Agent&) = default;
};

// Distance thresholds gating the active modes.
struct Reach {
  double walk_max_km = 7.0;
  double bike_max_km = 15.0;
};

struct Switches {
  bool biases = true;
  bool habits = true;
};

struct Decision {
  Mode chosen = Mode::kCar;
  bool by_habit = false;
  // Habit pick that differs from the subjective rational best.
  bool habit_contrary = false;
  // Rational pick that differs from the objective rational best.
  bool biased = false;
  // Subjective best over all four modes is not available.
  bool constrained = false;
  // No mode was available; the agent kept its current mode.
  bool forced_retention = false;
  double satisfaction = 0.0;
  Scores subjective_scores{};
  Scores objective_scores{};
};

ModeSet available_modes(double distance_km, bool access_bus, bool access_car,
                        std::optional<Mode> blocked = std::nullopt,
                        const Reach& reach = {});

// Applies the filter multiplicatively and clamps to [0, 100]. Returns the
// objective grid unchanged when biases are disabled.
ModeGrid perceive(const ModeGrid& objective, const ModeGrid& filter,
                  bool biases_enabled);

// Priority-weighted mean of the mode's values, in [0, 100].
// Throws ModelError("degenerate priorities") when all priorities are zero.
double score(const ModeGrid& values, const CriteriaVector& priorities,
             Mode mode);

Scores score_all(const ModeGrid& values, const CriteriaVector& priorities);

// Argmax of `scores` over `candidates`; the first mode in canonical order
// wins ties. Throws ModelError("no available mode") when empty.
Mode best_of(const Scores& scores, ModeSet candidates);

Mode best_mode(const ModeGrid& values, const CriteriaVector& priorities,
               ModeSet candidates);

Frequencies habit_frequencies(const TripWindow& trips);

// Habit fires when u < frequency of the usual mode.
bool habit_triggers(const Frequencies& frequencies, double u);

// Frequency-weighted average of the per-mode prototypes.
// Throws ModelError("no habit mass") when all frequencies are zero.
ModeGrid blend_filter(const Frequencies& frequencies,
                      const Prototypes& prototypes);

// One agent's choice for the current tick. `u_habit` is a uniform draw in
// [0, 1) consumed by the habit test.
Decision decide(const Agent& agent, const ModeGrid& layout, Switches switches,
                std::optional<Mode> blocked, double u_habit,
                const Reach& reach = {});

// Appends the chosen mode to the window and, with biases on, re-blends the
// agent's filter from its updated habits.
void record_trip(Agent& agent, Mode chosen, const Prototypes& prototypes,
                 bool biases_enabled);

}  // namespace modalsim

#endif  // MODALSIM_MODEL_HPP_
