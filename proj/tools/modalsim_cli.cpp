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


// modalsim: batch scenarios, survey calibration and the steering server.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "modalsim/calibration.hpp"
#include "modalsim/scenario.hpp"
#include "modalsim/steering_server.hpp"
#include "modalsim/survey.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace modalsim;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

CalibrationData load_calibration(const std::string& path) {
  if (path.empty()) return default_calibration();
  return CalibrationData::from_json(read_json_file(path));
}

ExportFormat parse_format(const std::string& name) {
  if (name == "csv") return ExportFormat::kCsv;
  if (name == "json") return ExportFormat::kJson;
  throw ValidationError("unknown format '" + name + "'");
}

struct RunArgs {
  std::string scenario;
  std::string calibration;
  std::string out = ".";
  std::string format = "csv";
  unsigned threads = 0;
};

int cmd_run(const RunArgs& a) {
  const Scenario scenario = Scenario::load(a.scenario);
  const CalibrationData calib = load_calibration(a.calibration);
  const ExportFormat format = parse_format(a.format);
  const auto runs = run_scenario(scenario, calib, a.threads);
  const auto written =
      export_runs(runs, a.out, fs::path(a.scenario).stem().string(), format);
  for (const auto& p : written) std::cout << p.string() << "\n";
  return 0;
}

struct CalibrateArgs {
  std::string survey;
  std::string caps;
  std::string columns;
  std::string out;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const ColumnMapping mapping = a.columns.empty()
                                    ? ColumnMapping::defaults()
                                    : ColumnMapping::from_json(read_json_file(a.columns));
  const DistanceCaps caps =
      a.caps.empty() ? default_distance_caps() : parse_distance_caps(a.caps);
  std::ifstream in(a.survey, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + a.survey);
  const SurveyParseResult parsed = parse_survey(in, mapping);
  const CalibrationData calib =
      calibrate(parsed, caps, default_national_shares(), a.survey);

  const std::string text = calib.to_json().dump(2) + "\n";
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    std::ofstream out(a.out);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + a.out);
  }
  const auto& p = calib.provenance;
  std::cerr << "rows read " << p.rows_read << ", dropped " << p.rows_dropped
            << ", retained " << p.rows_retained << "\n";
  return 0;
}

struct ServeArgs {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;
  std::string calibration;
  std::uint64_t seed = 1;
  std::size_t agents = 200;
  std::string static_dir;
  std::string log_dir;
};

int cmd_serve(const ServeArgs& a) {
  SimConfig config;
  config.seed = a.seed;
  config.n_agents = a.agents;
  ServerOptions options;
  options.address = a.address;
  options.port = a.port;
  options.static_dir = a.static_dir;
  options.log_dir = a.log_dir;

  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SteeringServer server(load_calibration(a.calibration), config, options);
  server.start();
  std::cout << "listening on ws://" << a.address << ":" << server.port() << "/"
            << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based simulation of urban travel mode choice"};
  app.set_version_flag("--version", std::string(MODALSIM_VERSION));
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario file across its seeds");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--calibration", run.calibration,
                      "Calibration JSON (default: embedded tables)");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--format", run.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--threads", run.threads, "Worker threads (0 = all cores)");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Build calibration from a survey CSV");
  cal_cmd->add_option("--survey", cal.survey, "Survey CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cal_cmd->add_option("--caps", cal.caps,
                      "Distance caps in km, e.g. car=195,bike=55,bus=100,walk=10");
  cal_cmd->add_option("--columns", cal.columns, "Column mapping JSON");
  cal_cmd->add_option("--out", cal.out, "Output path (default: stdout)");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Host live steering sessions");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 = any free port)");
  serve_cmd->add_option("--address", serve.address, "Bind address");
  serve_cmd->add_option("--calibration", serve.calibration,
                        "Calibration JSON (default: embedded tables)");
  serve_cmd->add_option("--seed", serve.seed, "Seed for every session");
  serve_cmd->add_option("--agents", serve.agents, "Agents per session")
      ->check(CLI::PositiveNumber);
  serve_cmd->add_option("--static", serve.static_dir, "Directory of dashboard assets")
      ->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--log-dir", serve.log_dir,
                        "Where to save each session's replay log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*cal_cmd) return cmd_calibrate(cal);
    if (*serve_cmd) return cmd_serve(serve);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
