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

#include "modalsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "json_util.hpp"

namespace modalsim {
namespace {

using nlohmann::json;

std::uint64_t tick_value(const json& v, const std::string& path) {
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
    throw ValidationError(path + ": must be non-negative");
  }
  if (!v.is_number_unsigned()) {
    throw ValidationError(path + ": expected non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool bool_value(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ValidationError(path + ": expected boolean");
  return v.get<bool>();
}

// One row of the exported table; satisfaction is NaN when absent.
constexpr std::size_t kColumnCount = 12;

const std::array<std::string, kColumnCount + 1>& header() {
  static const std::array<std::string, kColumnCount + 1> h{
      "tick",       "share_car",  "share_bike",       "share_bus",
      "share_walk", "sat_car",    "sat_bike",         "sat_bus",
      "sat_walk",   "n_by_habit", "n_habit_contrary", "n_biased",
      "n_constrained"};
  return h;
}

std::array<double, kColumnCount> row_values(const MetricsSnapshot& s) {
  std::array<double, kColumnCount> v{};
  std::size_t i = 0;
  for (Mode m : kAllModes) v[i++] = s.shares[m];
  for (Mode m : kAllModes) {
    v[i++] = s.satisfaction[m] ? *s.satisfaction[m] : std::nan("");
  }
  v[i++] = static_cast<double>(s.counts.by_habit);
  v[i++] = static_cast<double>(s.counts.habit_contrary);
  v[i++] = static_cast<double>(s.counts.biased);
  v[i++] = static_cast<double>(s.counts.constrained);
  return v;
}

std::string cell(double v) { return std::isnan(v) ? "" : format_number(v); }

json json_cell(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

Scenario Scenario::parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
  return from_json(j);
}

Scenario Scenario::from_json(const json& j) {
  const std::string root = "scenario";
  json_util::expect_keys(j, {"config", "events"}, root);
  Scenario s;

  if (auto it = j.find("config"); it != j.end()) {
    const std::string path = root + ".config";
    json_util::expect_keys(*it, {"n_agents", "ticks", "seeds", "biases", "habits"},
                           path);
    ScenarioConfig& c = s.config;
    if (auto v = it->find("n_agents"); v != it->end()) {
      c.n_agents = tick_value(*v, path + ".n_agents");
      if (c.n_agents == 0) throw ValidationError(path + ".n_agents: empty population");
    }
    if (auto v = it->find("ticks"); v != it->end()) {
      c.ticks = tick_value(*v, path + ".ticks");
    }
    if (auto v = it->find("seeds"); v != it->end()) {
      if (!v->is_array() || v->empty()) {
        throw ValidationError(path + ".seeds: expected non-empty array");
      }
      c.seeds.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        c.seeds.push_back(
            tick_value((*v)[i], path + ".seeds[" + std::to_string(i) + "]"));
      }
    }
    if (auto v = it->find("biases"); v != it->end()) {
      c.biases = bool_value(*v, path + ".biases");
    }
    if (auto v = it->find("habits"); v != it->end()) {
      c.habits = bool_value(*v, path + ".habits");
    }
  }

  if (auto it = j.find("events"); it != j.end()) {
    if (!it->is_array()) throw ValidationError(root + ".events: expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      const std::string path = root + ".events[" + std::to_string(i) + "]";
      if (!e.is_object()) throw ValidationError(path + ": expected object");
      ScenarioEvent ev;
      ev.at = tick_value(json_util::member(e, "at", path), path + ".at");
      if (auto v = e.find("every"); v != e.end()) {
        ev.every = tick_value(*v, path + ".every");
        if (*ev.every == 0) throw ValidationError(path + ".every: must be positive");
      }
      if (auto v = e.find("count"); v != e.end()) {
        ev.count = tick_value(*v, path + ".count");
        if (*ev.count == 0) throw ValidationError(path + ".count: must be positive");
        if (*ev.count > 1 && !ev.every) {
          throw ValidationError(path + ".count: repetitions need 'every'");
        }
      }
      ev.action = intervention_from_json(e, path, {"at", "every", "count"});
      s.events.push_back(std::move(ev));
    }
  }
  return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

json Scenario::to_json() const {
  json j;
  j["config"] = {{"n_agents", config.n_agents},
                 {"ticks", config.ticks},
                 {"seeds", config.seeds},
                 {"biases", config.biases},
                 {"habits", config.habits}};
  j["events"] = json::array();
  for (const ScenarioEvent& e : events) {
    json ev = intervention_to_json(e.action);
    ev["at"] = e.at;
    if (e.every) ev["every"] = *e.every;
    if (e.count) ev["count"] = *e.count;
    j["events"].push_back(std::move(ev));
  }
  return j;
}

std::vector<TimedIntervention> Scenario::timeline() const {
  std::vector<TimedIntervention> out;
  for (const ScenarioEvent& e : events) {
    const std::uint64_t reps = e.count.value_or(1);
    const std::uint64_t step = e.every.value_or(0);
    for (std::uint64_t k = 0; k < reps; ++k) {
      out.push_back({e.at + k * step, e.action});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.at < b.at; });
  return out;
}

SimConfig Scenario::sim_config(std::uint64_t seed) const {
  SimConfig c;
  c.n_agents = config.n_agents;
  c.seed = seed;
  c.biases_enabled = config.biases;
  c.habits_enabled = config.habits;
  return c;
}

SeedRun run_seed(const Scenario& scenario, const CalibrationData& calib,
                 std::uint64_t seed) {
  Simulation sim(calib, scenario.sim_config(seed));
  const auto timeline = scenario.timeline();
  SeedRun run;
  run.seed = seed;
  run.initial = sim.observe();
  run.snapshots.reserve(scenario.config.ticks);
  std::size_t next = 0;
  for (std::uint64_t t = 0; t < scenario.config.ticks; ++t) {
    while (next < timeline.size() && timeline[next].at == t) {
      sim.apply(timeline[next++].action);
    }
    run.snapshots.push_back(sim.step());
  }
  return run;
}

std::vector<SeedRun> run_scenario(const Scenario& scenario,
                                  const CalibrationData& calib,
                                  unsigned threads) {
  const std::size_t n = scenario.config.seeds.size();
  std::vector<SeedRun> runs(n);
  std::vector<std::exception_ptr> errors(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t i = cursor++; i < n; i = cursor++) {
      try {
        runs[i] = run_seed(scenario, calib, scenario.config.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return runs;
}

void write_series(std::ostream& out, const std::vector<MetricsSnapshot>& series,
                  ExportFormat format) {
  const auto& h = header();
  if (format == ExportFormat::kCsv) {
    write_csv_row(out, {h.begin(), h.end()});
    std::vector<std::string> row;
    for (const MetricsSnapshot& s : series) {
      row.clear();
      row.push_back(std::to_string(s.tick));
      for (double v : row_values(s)) row.push_back(cell(v));
      write_csv_row(out, row);
    }
    return;
  }
  json rows = json::array();
  for (const MetricsSnapshot& s : series) {
    json r = json::object();
    r["tick"] = s.tick;
    const auto v = row_values(s);
    for (std::size_t i = 0; i < kColumnCount; ++i) {
      if (i >= 8) {
        r[h[i + 1]] = static_cast<std::uint64_t>(v[i]);
      } else {
        r[h[i + 1]] = json_cell(v[i]);
      }
    }
    rows.push_back(std::move(r));
  }
  out << rows.dump(1) << '\n';
}

void write_aggregate(std::ostream& out, const std::vector<SeedRun>& runs,
                     ExportFormat format) {
  const auto& h = header();
  std::size_t ticks = 0;
  for (const SeedRun& r : runs) ticks = std::max(ticks, r.snapshots.size());

  std::vector<std::string> names{"tick", "n_seeds"};
  for (std::size_t c = 1; c < h.size(); ++c) {
    names.push_back("mean_" + h[c]);
    names.push_back("sd_" + h[c]);
  }

  json rows = json::array();
  if (format == ExportFormat::kCsv) write_csv_row(out, names);
  for (std::size_t t = 0; t < ticks; ++t) {
    std::uint64_t tick = 0;
    std::vector<std::array<double, kColumnCount>> values;
    for (const SeedRun& r : runs) {
      if (t < r.snapshots.size()) {
        tick = r.snapshots[t].tick;
        values.push_back(row_values(r.snapshots[t]));
      }
    }
    std::vector<double> stats;
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      double sum = 0.0;
      std::size_t k = 0;
      for (const auto& v : values) {
        if (!std::isnan(v[c])) {
          sum += v[c];
          ++k;
        }
      }
      const double mean = k > 0 ? sum / static_cast<double>(k) : std::nan("");
      double sd = k > 0 ? 0.0 : std::nan("");
      if (k > 1) {
        double ss = 0.0;
        for (const auto& v : values) {
          if (!std::isnan(v[c])) ss += (v[c] - mean) * (v[c] - mean);
        }
        sd = std::sqrt(ss / static_cast<double>(k - 1));
      }
      stats.push_back(mean);
      stats.push_back(sd);
    }
    if (format == ExportFormat::kCsv) {
      std::vector<std::string> row{std::to_string(tick),
                                   std::to_string(values.size())};
      for (double v : stats) row.push_back(cell(v));
      write_csv_row(out, row);
    } else {
      json r = json::object();
      r["tick"] = tick;
      r["n_seeds"] = values.size();
      for (std::size_t i = 0; i < stats.size(); ++i) {
        r[names[i + 2]] = json_cell(stats[i]);
      }
      rows.push_back(std::move(r));
    }
  }
  if (format == ExportFormat::kJson) out << rows.dump(1) << '\n';
}

std::vector<std::filesystem::path> export_runs(
    const std::vector<SeedRun>& runs, const std::filesystem::path& out_dir,
    const std::string& stem, ExportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::string ext = format == ExportFormat::kCsv ? ".csv" : ".json";
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };

  std::vector<std::filesystem::path> written;
  for (const SeedRun& r : runs) {
    const auto path =
        out_dir / (stem + "_seed" + std::to_string(r.seed) + ext);
    auto f = open(path);
    write_series(f, r.snapshots, format);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
  }
  const auto path = out_dir / (stem + "_aggregate" + ext);
  auto f = open(path);
  write_aggregate(f, runs, format);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  written.push_back(path);
  return written;
}

}  // namespace modalsim
