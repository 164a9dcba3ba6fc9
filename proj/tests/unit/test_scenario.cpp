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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "modalsim/scenario.hpp"

using namespace modalsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kPresets = fs::path(MODALSIM_SOURCE_DIR) / "scenarios";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("modalsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Scenario small(std::uint64_t ticks, std::vector<std::uint64_t> seeds = {1}) {
  Scenario s;
  s.config.n_agents = 50;
  s.config.ticks = ticks;
  s.config.seeds = std::move(seeds);
  return s;
}

}  // namespace

TEST_CASE("bundled bike safety preset") {
  const Scenario s = Scenario::load(kPresets / "bike_safety.json");
  CHECK(s.config.ticks == 400);
  CHECK(s.config.seeds.size() == 20);
  CHECK(s.config.biases);
  CHECK(s.config.habits);
  const auto tl = s.timeline();
  REQUIRE(tl.size() == 12);
  CHECK(tl[0].at == 0);
  CHECK(tl[0].action == Intervention{SetValue{Mode::kBike, Criterion::kSafety, 34}});
  for (std::size_t k = 0; k < 10; ++k) {
    const auto& ev = tl[k + 1 + (k >= 7 ? 1 : 0)];
    CHECK(ev.at == 20 * k);
    CHECK(ev.action == Intervention{AdjustValue{Mode::kBike, Criterion::kSafety, 5}});
  }
  CHECK(tl[7].at == 120);
  CHECK(tl[7].action == Intervention{AdjustValue{Mode::kBike, Criterion::kSafety, 5}});
  CHECK(tl[8].at == 120);
  CHECK(tl[8].action == Intervention{ResetHabits{}});
}

TEST_CASE("every bundled preset parses and round-trips") {
  for (const auto& entry : fs::directory_iterator(kPresets)) {
    CAPTURE(entry.path().string());
    const Scenario s = Scenario::load(entry.path());
    CHECK(Scenario::parse(s.to_json().dump()) == s);
  }
}

TEST_CASE("scenario validation") {
  CHECK_NOTHROW(Scenario::parse(R"({"config": {}, "events": []})"));
  CHECK(Scenario::parse(R"({"events": []})").config.ticks == 400);

  auto fails_at = [](const char* text, const char* path) {
    CAPTURE(text);
    try {
      Scenario::parse(text);
      FAIL("accepted");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
  };
  fails_at(R"({"events": [{"at": -1, "action": "reset_habits"}]})", "events[0].at");
  fails_at(R"({"events": [{"at": 0, "action": "reset_habits"}, {"at": 2.5, "action": "reset_habits"}]})",
           "events[1].at");
  fails_at(R"({"config": {"ticks": 10, "colour": 1}})", "config.colour");
  fails_at(R"({"events": [{"at": 0, "every": 0, "count": 2, "action": "reset_habits"}]})", "every");
  fails_at(R"({"events": [{"at": 0, "count": 3, "action": "reset_habits"}]})", "count");
  fails_at(R"({"events": [{"at": 0, "action": "set_value", "mode": "bike"}]})", "events[0]");
  fails_at(R"({"config": {"seeds": []}})", "seeds");
  fails_at(R"({"config": {"n_agents": 0}})", "n_agents");
  fails_at(R"([1, 2])", "scenario");
  CHECK_THROWS_AS(Scenario::parse("{not json"), ValidationError);
  CHECK_THROWS_AS(Scenario::load("/nonexistent/scenario.json"), std::runtime_error);
}

TEST_CASE("timeline expansion is sorted and stable") {
  const Scenario s = Scenario::parse(R"({"events": [
      {"at": 10, "every": 5, "count": 3, "action": "adjust_value", "mode": "car", "criterion": "time", "delta": 1},
      {"at": 15, "action": "reset_habits"},
      {"at": 0, "action": "toggle", "target": "biases", "value": false}]})");
  const auto tl = s.timeline();
  REQUIRE(tl.size() == 5);
  std::vector<std::uint64_t> ats;
  for (const auto& t : tl) ats.push_back(t.at);
  CHECK(ats == std::vector<std::uint64_t>{0, 10, 15, 15, 20});
  CHECK(std::holds_alternative<AdjustValue>(tl[2].action));
  CHECK(std::holds_alternative<ResetHabits>(tl[3].action));
}

TEST_CASE("zero ticks give a header-only series") {
  const auto runs = run_scenario(small(0), default_calibration());
  std::ostringstream out;
  write_series(out, runs[0].snapshots);
  CHECK(out.str() ==
        "tick,share_car,share_bike,share_bus,share_walk,sat_car,sat_bike,sat_bus,"
        "sat_walk,n_by_habit,n_habit_contrary,n_biased,n_constrained\n");
}

TEST_CASE("series rows") {
  const auto runs = run_scenario(small(3), default_calibration());
  std::ostringstream out;
  write_series(out, runs[0].snapshots);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    if (lines++ == 0) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    CHECK(std::stoi(cell) == lines - 1);
    double total = 0;
    for (int k = 0; k < 4; ++k) {
      std::getline(ls, cell, ',');
      total += std::stod(cell);
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  CHECK(lines == 4);
}

TEST_CASE("userless modes leave satisfaction empty") {
  Scenario s = small(2);
  s.config.n_agents = 1;
  const auto runs = run_scenario(s, default_calibration());
  std::ostringstream csv;
  write_series(csv, runs[0].snapshots);
  CHECK(csv.str().find(",,") != std::string::npos);
  std::ostringstream js;
  write_series(js, runs[0].snapshots, ExportFormat::kJson);
  const json j = json::parse(js.str());
  REQUIRE(j.size() == 2);
  CHECK(j[0].size() == 13);
  int nulls = 0;
  for (const char* k : {"sat_car", "sat_bike", "sat_bus", "sat_walk"}) {
    nulls += j[0][k].is_null() ? 1 : 0;
  }
  CHECK(nulls == 3);
}

TEST_CASE("exports are byte-deterministic and thread-independent") {
  Scenario s = Scenario::load(kPresets / "bike_safety.json");
  s.config.ticks = 60;
  s.config.seeds = {1, 2, 3, 4, 5};
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto pa = export_runs(run_scenario(s, default_calibration(), 1), a, "run");
  const auto pb = export_runs(run_scenario(s, default_calibration(), 4), b, "run");
  REQUIRE(pa.size() == 6);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].filename() == pb[i].filename());
    CHECK(slurp(pa[i]) == slurp(pb[i]));
  }
  CHECK(pa[0].filename() == "run_seed1.csv");
  CHECK(pa.back().filename() == "run_aggregate.csv");
}

TEST_CASE("aggregate matches a recomputation from the seed files") {
  Scenario s = small(20, {3, 5, 8});
  const auto dir = scratch("agg");
  const auto paths = export_runs(run_scenario(s, default_calibration()), dir, "agg");
  std::vector<std::vector<std::vector<std::string>>> seeds;
  for (std::size_t i = 0; i < 3; ++i) seeds.push_back(read_csv(paths[i]));
  const auto agg = read_csv(paths[3]);
  REQUIRE(agg.size() == 21);
  CHECK(agg[0][2] == "mean_share_car");
  CHECK(agg[0][3] == "sd_share_car");
  for (std::size_t row = 1; row < agg.size(); ++row) {
    CHECK(agg[row][1] == "3");
    for (std::size_t col = 1; col <= 4; ++col) {
      double mean = 0;
      for (const auto& f : seeds) mean += std::stod(f[row][col]) / 3;
      double ss = 0;
      for (const auto& f : seeds) ss += std::pow(std::stod(f[row][col]) - mean, 2);
      CHECK(std::stod(agg[row][2 * col]) == doctest::Approx(mean).epsilon(1e-12));
      CHECK(std::stod(agg[row][2 * col + 1]) == doctest::Approx(std::sqrt(ss / 2)).epsilon(1e-9));
    }
  }
}

TEST_CASE("json export mirrors the csv columns") {
  const auto dir = scratch("json");
  const auto paths = export_runs(run_scenario(small(4, {1, 2}), default_calibration()), dir, "j",
                                 ExportFormat::kJson);
  CHECK(paths[0].extension() == ".json");
  const json seed = json::parse(slurp(paths[0]));
  REQUIRE(seed.size() == 4);
  CHECK(seed[3]["tick"] == 4);
  CHECK(seed[0].contains("n_constrained"));
  const json agg = json::parse(slurp(paths[2]));
  CHECK(agg[0]["n_seeds"] == 2);
  CHECK(agg[0].contains("sd_share_bus"));
}

TEST_CASE("unwritable output fails") {
  const auto runs = run_scenario(small(1), default_calibration());
  CHECK_THROWS_AS(export_runs(runs, "/proc/modalsim/nope", "x"), std::runtime_error);
}

TEST_CASE("events apply before the step that follows them") {
  Scenario s = small(3);
  s.events.push_back({2, std::nullopt, std::nullopt, ResetHabits{}});
  const SeedRun run = run_seed(s, default_calibration(), 1);
  REQUIRE(run.snapshots.size() == 3);
  CHECK(run.snapshots[1].counts.by_habit > 0);
  CHECK(run.snapshots[2].counts.by_habit == 0);
  CHECK(run.initial.tick == 0);
}

TEST_CASE("sim config follows the scenario") {
  Scenario s = small(5);
  s.config.biases = false;
  const SimConfig c = s.sim_config(77);
  CHECK(c.seed == 77);
  CHECK(c.n_agents == 50);
  CHECK_FALSE(c.biases_enabled);
  CHECK(c.habits_enabled);
}
