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


#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "modalsim/engine.hpp"
#include "modalsim/population.hpp"

using namespace modalsim;
using nlohmann::json;

namespace {

SimConfig config(std::uint64_t seed, std::size_t n = 200) {
  SimConfig c;
  c.seed = seed;
  c.n_agents = n;
  return c;
}

PerMode<double> shares(double car, double bike, double bus, double walk) {
  PerMode<double> s;
  s[Mode::kCar] = car;
  s[Mode::kBike] = bike;
  s[Mode::kBus] = bus;
  s[Mode::kWalk] = walk;
  return s;
}

double normal_cdf(double x, double mu, double sd) {
  return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0)));
}

double share_sum(const MetricsSnapshot& s) {
  double t = 0;
  for (Mode m : kAllModes) t += s.shares[m];
  return t;
}

}  // namespace

TEST_CASE("largest remainder allocation") {
  const auto c = allocate_counts(200, default_national_shares());
  CHECK(c[Mode::kCar] == 151);
  CHECK(c[Mode::kBike] == 4);
  CHECK(c[Mode::kBus] == 33);
  CHECK(c[Mode::kWalk] == 12);

  const auto one = allocate_counts(1, shares(0, 1, 0, 0));
  CHECK(one[Mode::kBike] == 1);
  CHECK(one[Mode::kCar] == 0);

  const auto ten = allocate_counts(10, shares(.25, .25, .25, .25));
  std::size_t total = 0;
  for (Mode m : kAllModes) total += ten[m];
  CHECK(total == 10);
  CHECK(ten[Mode::kCar] == 3);
  CHECK(ten[Mode::kBike] == 3);
  CHECK(ten[Mode::kBus] == 2);
}

TEST_CASE("sampled agents respect their usual mode") {
  const CalibrationData& cal = default_calibration();
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    const Mode m = kAllModes[static_cast<std::size_t>(i) % 4];
    const Agent a = sample_agent(m, cal, rng, i);
    CHECK(a.distance_km > 0.1);
    CHECK(a.distance_km <= 200);
    if (m == Mode::kWalk) CHECK(a.distance_km < 7);
    if (m == Mode::kBike) CHECK(a.distance_km < 15);
    if (m == Mode::kCar) CHECK(a.access_car);
    if (m == Mode::kBus) CHECK(a.access_bus);
    for (Criterion c : kAllCriteria) {
      const double mean = cal.mean_priorities[m][c];
      CHECK(a.priorities[c] >= 0.8 * mean - 1e-9);
      CHECK(a.priorities[c] <= 1.2 * mean + 1e-9);
    }
    CHECK(a.trips == TripWindow::filled(m));
    CHECK(a.filter == cal.prototypes[m]);
    CHECK(a.current_mode == m);
  }
}

TEST_CASE("car distances follow the truncated normal") {
  const CalibrationData& cal = default_calibration();
  const auto& ds = cal.distance_stats[Mode::kCar];
  Rng rng(2024);
  std::vector<double> xs;
  for (int i = 0; i < 5000; ++i) xs.push_back(sample_agent(Mode::kCar, cal, rng).distance_km);
  std::sort(xs.begin(), xs.end());
  const double lo = normal_cdf(0.1, ds.mean, ds.stdev);
  const double hi = normal_cdf(200, ds.mean, ds.stdev);
  double d = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = (normal_cdf(xs[i], ds.mean, ds.stdev) - lo) / (hi - lo);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  // Kolmogorov-Smirnov critical value at the 0.1% level.
  CHECK(d < 1.95 / std::sqrt(n));
}

TEST_CASE("access draws follow the group rates") {
  const CalibrationData& cal = default_calibration();
  Rng rng(5);
  const int n = 20000;
  int no_car = 0;
  for (int i = 0; i < n; ++i) no_car += sample_agent(Mode::kBus, cal, rng).access_car ? 0 : 1;
  const double p = cal.access_prob[Mode::kBus].no_car;
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(no_car / double(n) - p) < 4 * sigma);
}

TEST_CASE("population is ordered by mode with sequential ids") {
  Rng rng(1);
  const auto pop = sample_population(200, default_national_shares(), default_calibration(), rng);
  REQUIRE(pop.size() == 200);
  for (std::size_t i = 0; i < pop.size(); ++i) CHECK(pop[i].id == static_cast<std::int64_t>(i));
  CHECK(pop[0].current_mode == Mode::kCar);
  CHECK(pop[199].current_mode == Mode::kWalk);
}

TEST_CASE("simulation basics") {
  Simulation sim(default_calibration(), config(1));
  CHECK(sim.tick() == 0);
  const MetricsSnapshot s0 = sim.observe();
  CHECK(s0.tick == 0);
  CHECK(s0.shares[Mode::kCar] == doctest::Approx(151.0 / 200));
  CHECK(share_sum(s0) == doctest::Approx(1.0).epsilon(1e-12));
  for (Mode m : kAllModes) CHECK(s0.satisfaction[m].has_value());

  for (std::uint64_t t = 1; t <= 50; ++t) {
    const MetricsSnapshot s = sim.step();
    CHECK(s.tick == t);
    CHECK(std::abs(share_sum(s) - 1.0) < 1e-9);
    CHECK(sim.agents().size() == 200);
  }
  CHECK(sim.last_decisions().size() == 200);
  CHECK_THROWS_WITH_AS(Simulation(default_calibration(), config(1, 0)), "empty population",
                       ValidationError);
}

TEST_CASE("same seed, same trajectory") {
  Simulation a(default_calibration(), config(42));
  Simulation b(default_calibration(), config(42));
  Simulation c(default_calibration(), config(43));
  bool differs = false;
  for (int t = 0; t < 100; ++t) {
    const auto sa = a.step();
    CHECK(sa == b.step());
    differs = differs || !(sa == c.step());
  }
  CHECK(a.to_json() == b.to_json());
  CHECK(differs);
}

TEST_CASE("state round-trips through JSON mid-run") {
  Simulation a(default_calibration(), config(8));
  for (int t = 0; t < 30; ++t) a.step();
  a.apply(AdjustValue{Mode::kBike, Criterion::kSafety, 30});
  const json state = a.to_json();
  Simulation b = Simulation::from_json(json::parse(state.dump()));
  CHECK(b.to_json() == state);
  for (int t = 0; t < 30; ++t) CHECK(a.step() == b.step());
}

TEST_CASE("toggles silence their counters") {
  SimConfig no_bias = config(3);
  no_bias.biases_enabled = false;
  Simulation a(default_calibration(), no_bias);
  SimConfig no_habit = config(3);
  no_habit.habits_enabled = false;
  Simulation b(default_calibration(), no_habit);
  for (int t = 0; t < 100; ++t) {
    CHECK(a.step().counts.biased == 0);
    const auto sb = b.step();
    CHECK(sb.counts.by_habit == 0);
    CHECK(sb.counts.habit_contrary == 0);
  }
}

TEST_CASE("habits hold shares apart from events") {
  // Full windows and no layout change: only blocked agents move.
  std::size_t moved = 0;
  std::size_t total = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Simulation sim(default_calibration(), config(seed));
    std::vector<Mode> before;
    for (const Agent& a : sim.agents()) before.push_back(a.current_mode);
    sim.step();
    for (std::size_t i = 0; i < before.size(); ++i) {
      moved += sim.agents()[i].current_mode != before[i] ? 1 : 0;
    }
    total += before.size();
  }
  const double rate = double(moved) / double(total);
  const double sigma = std::sqrt(0.01 * 0.99 / double(total));
  CHECK(rate <= 0.01 + 4 * sigma);
  CHECK(rate >= 0.01 - 4 * sigma - 0.002);
}

TEST_CASE("interventions") {
  Simulation sim(default_calibration(), config(4));
  sim.apply(SetValue{Mode::kBike, Criterion::kSafety, 150});
  CHECK(sim.layout()(Mode::kBike, Criterion::kSafety) == 100);
  sim.apply(AdjustValue{Mode::kBike, Criterion::kSafety, -30});
  CHECK(sim.layout()(Mode::kBike, Criterion::kSafety) == 70);
  sim.apply(AdjustValue{Mode::kCar, Criterion::kComfort, -500});
  CHECK(sim.layout()(Mode::kCar, Criterion::kComfort) == 0);

  const double before = sim.agents()[0].priorities[Criterion::kEcology];
  sim.apply(ShiftPriority{Criterion::kEcology, 5});
  CHECK(sim.agents()[0].priorities[Criterion::kEcology] ==
        doctest::Approx(std::min(100.0, before + 5)));

  sim.apply(Toggle{ToggleTarget::kBiases, false});
  CHECK_FALSE(sim.config().biases_enabled);
  sim.apply(Toggle{ToggleTarget::kHabits, false});
  CHECK_FALSE(sim.config().habits_enabled);
}

TEST_CASE("a priority shift that zeroes every weight is refused") {
  Simulation sim(default_calibration(), config(4, 5));
  for (Criterion c : kAllCriteria) {
    if (c != Criterion::kTime) sim.apply(ShiftPriority{c, -100});
  }
  const json before = sim.to_json();
  CHECK_THROWS_AS(sim.apply(ShiftPriority{Criterion::kTime, -100}), ValidationError);
  CHECK(sim.to_json() == before);
}

TEST_CASE("reset empties windows and keeps filters") {
  Simulation sim(default_calibration(), config(6));
  for (int t = 0; t < 5; ++t) sim.step();
  std::vector<ModeGrid> filters;
  for (const Agent& a : sim.agents()) filters.push_back(a.filter);
  sim.apply(ResetHabits{});
  for (std::size_t i = 0; i < filters.size(); ++i) {
    CHECK(sim.agents()[i].trips.empty());
    CHECK(sim.agents()[i].filter == filters[i]);
  }
  const auto s = sim.step();
  CHECK(s.counts.by_habit == 0);
  CHECK(s.counts.habit_contrary == 0);
  for (const Agent& a : sim.agents()) CHECK(a.trips.size() == 1);
}

TEST_CASE("intervention JSON") {
  const std::vector<Intervention> all{
      SetValue{Mode::kBike, Criterion::kSafety, 34},
      AdjustValue{Mode::kCar, Criterion::kComfort, -5},
      ShiftPriority{Criterion::kEcology, 2.5},
      Toggle{ToggleTarget::kHabits, false},
      ResetHabits{},
  };
  for (const auto& iv : all) {
    CHECK(intervention_from_json(intervention_to_json(iv), "x") == iv);
  }
  CHECK(intervention_to_json(ResetHabits{}) == json{{"action", "reset_habits"}});

  CHECK_THROWS_WITH_AS(
      intervention_from_json(json::parse(R"({"action":"adjust_value","mode":"tram","criterion":"time","delta":1})"), "ev"),
      doctest::Contains("ev.mode"), ValidationError);
  CHECK_THROWS_AS(
      intervention_from_json(json::parse(R"({"action":"reset_habits","when":3})"), "ev"),
      ValidationError);
  CHECK_THROWS_AS(intervention_from_json(json::parse(R"({"action":"teleport"})"), "ev"),
                  ValidationError);
  CHECK_NOTHROW(intervention_from_json(json::parse(R"({"action":"reset_habits","at":3})"),
                                       "ev", {"at"}));
}

TEST_CASE("snapshot JSON") {
  Simulation sim(default_calibration(), config(1, 4));
  const json j = sim.step().to_json();
  CHECK(j.at("tick") == 1);
  CHECK(j.at("shares").size() == 4);
  CHECK(j.at("counts").contains("by_habit"));
  CHECK(j.at("counts").contains("constrained"));
}
