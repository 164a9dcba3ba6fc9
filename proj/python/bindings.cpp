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


// Python extension. Structured values cross the boundary as JSON text; the
// modalsim package wraps them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "../src/json_util.hpp"
#include "modalsim/calibration.hpp"
#include "modalsim/engine.hpp"
#include "modalsim/scenario.hpp"
#include "modalsim/steering.hpp"
#include "modalsim/survey.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace modalsim;

namespace {

Mode mode_named(const std::string& name) {
  const auto m = parse_mode(name);
  if (!m) throw ValidationError("unknown mode '" + name + "'");
  return *m;
}

CalibrationData calibration_from(const std::string& text) {
  if (text.empty()) return default_calibration();
  return CalibrationData::from_json(json::parse(text));
}

std::string run_json(const SeedRun& run) {
  json snaps = json::array();
  for (const auto& s : run.snapshots) snaps.push_back(s.to_json());
  return json{{"seed", run.seed},
              {"initial", run.initial.to_json()},
              {"snapshots", std::move(snaps)}}
      .dump();
}

json agent_json(const Agent& a) {
  json trips = json::array();
  for (Mode m : a.trips.entries()) trips.push_back(to_string(m));
  const auto usual = a.usual_mode();
  return {{"id", a.id},
          {"current_mode", to_string(a.current_mode)},
          {"usual_mode", usual ? json(to_string(*usual)) : json(nullptr)},
          {"satisfaction", a.satisfaction},
          {"distance_km", a.distance_km},
          {"access_bus", a.access_bus},
          {"access_car", a.access_car},
          {"priorities", json_util::criteria_to_json(a.priorities)},
          {"filter", json_util::grid_to_json(a.filter)},
          {"trips", std::move(trips)}};
}

}  // namespace

PYBIND11_MODULE(_modalsim, m) {
  m.doc() = "modalsim core bindings";
  m.attr("__version__") = MODALSIM_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);

  m.def(
      "score",
      [](const std::string& values, const std::string& priorities,
         const std::string& mode) {
        return score(json_util::grid_from_json(json::parse(values), "values"),
                     json_util::criteria_from_json(json::parse(priorities),
                                                   "priorities"),
                     mode_named(mode));
      },
      py::arg("values"), py::arg("priorities"), py::arg("mode"));

  m.def("default_calibration",
        [] { return default_calibration().to_json().dump(); });

  m.def(
      "calibrate",
      [](const std::string& path, const std::string& caps,
         const std::string& columns) {
        const ColumnMapping mapping =
            columns.empty() ? ColumnMapping::defaults()
                            : ColumnMapping::from_json(json::parse(columns));
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ValidationError("cannot open " + path);
        const auto parsed = parse_survey(in, mapping);
        return calibrate(parsed,
                         caps.empty() ? default_distance_caps()
                                      : parse_distance_caps(caps),
                         default_national_shares(), path)
            .to_json()
            .dump();
      },
      py::arg("path"), py::arg("caps") = "", py::arg("columns") = "");

  m.def(
      "run_scenario",
      [](const std::string& scenario, const std::string& calibration,
         unsigned threads) {
        const Scenario sc = Scenario::parse(scenario);
        const CalibrationData calib = calibration_from(calibration);
        std::vector<SeedRun> runs;
        {
          py::gil_scoped_release release;
          runs = run_scenario(sc, calib, threads);
        }
        std::vector<std::string> out;
        for (const auto& r : runs) out.push_back(run_json(r));
        return out;
      },
      py::arg("scenario"), py::arg("calibration") = "", py::arg("threads") = 0);

  m.def(
      "series_csv",
      [](const std::string& scenario, const std::string& calibration,
         std::uint64_t seed) {
        const Scenario sc = Scenario::parse(scenario);
        const SeedRun run = run_seed(sc, calibration_from(calibration), seed);
        std::ostringstream out;
        write_series(out, run.snapshots);
        return out.str();
      },
      py::arg("scenario"), py::arg("calibration") = "", py::arg("seed"));

  py::class_<Simulation>(m, "Simulation")
      .def(py::init([](std::size_t n_agents, std::uint64_t seed, bool biases,
                       bool habits, const std::string& calibration) {
             SimConfig config;
             config.n_agents = n_agents;
             config.seed = seed;
             config.biases_enabled = biases;
             config.habits_enabled = habits;
             return Simulation(calibration_from(calibration), config);
           }),
           py::arg("n_agents") = 200, py::arg("seed") = 0,
           py::arg("biases") = true, py::arg("habits") = true,
           py::arg("calibration") = "")
      .def("step", [](Simulation& s) { return s.step().to_json().dump(); })
      .def("observe", [](const Simulation& s) { return s.observe().to_json().dump(); })
      .def("apply",
           [](Simulation& s, const std::string& intervention) {
             s.apply(intervention_from_json(json::parse(intervention),
                                            "intervention"));
           })
      .def_property_readonly("tick", &Simulation::tick)
      .def("layout",
           [](const Simulation& s) {
             return json_util::grid_to_json(s.layout()).dump();
           })
      .def("agents",
           [](const Simulation& s) {
             json out = json::array();
             for (const Agent& a : s.agents()) out.push_back(agent_json(a));
             return out.dump();
           })
      .def("state", [](const Simulation& s) { return s.to_json().dump(); });

  py::class_<SteeringSession>(m, "SteeringSession")
      .def(py::init([](std::uint64_t seed, std::size_t n_agents,
                       const std::string& calibration) {
             SimConfig config;
             config.seed = seed;
             config.n_agents = n_agents;
             return std::make_unique<SteeringSession>(
                 calibration_from(calibration), config);
           }),
           py::arg("seed") = 0, py::arg("n_agents") = 200,
           py::arg("calibration") = "")
      .def("submit", &SteeringSession::submit)
      .def("process_commands", &SteeringSession::process_commands)
      .def("advance", &SteeringSession::advance)
      .def("drain_events",
           [](SteeringSession& s) {
             std::vector<std::string> out;
             for (const auto& e : s.drain_events()) out.push_back(e.dump());
             return out;
           })
      .def_property_readonly("paused", &SteeringSession::paused)
      .def("replay_log",
           [](const SteeringSession& s) { return s.replay_log().to_json().dump(); });
}
