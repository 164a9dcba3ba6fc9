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


#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "doctest.h"
#include "modalsim/steering.hpp"
#include "modalsim/steering_server.hpp"

using namespace modalsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

SimConfig config(std::uint64_t seed = 1, std::size_t n = 60) {
  SimConfig c;
  c.seed = seed;
  c.n_agents = n;
  return c;
}

std::vector<json> of_type(const std::vector<json>& events, const std::string& type) {
  std::vector<json> out;
  for (const auto& e : events) {
    if (e["type"] == type) out.push_back(e);
  }
  return out;
}

std::string parse_error(std::string_view text) {
  try {
    parse_command(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse_command") {
  const auto step = parse_command(R"({"id": 4, "type": "step", "n": 7})");
  CHECK(step.id == 4);
  CHECK(std::get<StepCommand>(step.body).n == 7);
  CHECK(std::get<StepCommand>(parse_command(R"({"id": 1, "type": "step"})").body).n == 1);

  const auto iv = parse_command(
      R"({"id": 2, "type": "intervene", "action": "adjust_value", "mode": "bike",
          "criterion": "safety", "delta": 5})");
  CHECK(std::get<InterveneCommand>(iv.body).action ==
        Intervention{AdjustValue{Mode::kBike, Criterion::kSafety, 5}});
  CHECK(std::get<SnapshotRequest>(
            parse_command(R"({"id": 3, "type": "snapshot_request", "view": "agents"})").body)
            .view == SnapshotView::kAgents);

  CHECK_FALSE(parse_error("{").empty());
  CHECK_FALSE(parse_error(R"({"type": "pause"})").empty());
  CHECK_FALSE(parse_error(R"({"id": "x", "type": "pause"})").empty());
  CHECK_FALSE(parse_error(R"({"id": 1, "type": "fly"})").empty());
  CHECK_FALSE(parse_error(R"({"id": 1, "type": "pause", "now": true})").empty());
  CHECK_FALSE(parse_error(R"({"id": 1, "type": "step", "n": 0})").empty());
  CHECK_FALSE(parse_error(R"({"id": 1, "type": "set_speed", "ticks_per_second": 0})").empty());
  CHECK_FALSE(parse_error(R"({"id": 1, "type": "set_speed", "ticks_per_second": 1001})").empty());
  CHECK(parse_error(R"({"id": 1, "type": "set_speed", "ticks_per_second": 1000})").empty());
  CHECK_FALSE(parse_error(R"({"id": 1, "type": "snapshot_request", "view": "map"})").empty());
  CHECK_FALSE(parse_error(R"({"id": 1, "type": "intervene", "action": "set_value",
                              "mode": "bike", "criterion": "safety"})")
                  .empty());

  std::optional<std::int64_t> id;
  CHECK_THROWS_AS(parse_command(R"({"id": 9, "type": "nope"})", &id), ValidationError);
  CHECK(id == 9);
}

TEST_CASE("histogram bins") {
  CHECK(histogram_bin(0) == 0);
  CHECK(histogram_bin(9.99) == 0);
  CHECK(histogram_bin(10) == 1);
  CHECK(histogram_bin(99.9) == 9);
  CHECK(histogram_bin(100) == 9);
  CHECK(histogram_bin(-3) == 0);
  CHECK(histogram_bin(140) == 9);
}

TEST_CASE("malformed input is answered at once") {
  SteeringSession s(default_calibration(), config());
  s.submit("not json");
  s.submit(R"({"id": 5, "type": "warp"})");
  const auto ev = s.drain_events();
  REQUIRE(ev.size() == 2);
  CHECK(ev[0]["type"] == "error");
  CHECK(ev[0]["id"].is_null());
  CHECK(ev[1]["type"] == "error");
  CHECK(ev[1]["id"] == 5);
}

TEST_CASE("every command gets exactly one reply") {
  SteeringSession s(default_calibration(), config());
  const std::vector<std::string> cmds = {
      R"({"id": 1, "type": "pause"})",
      R"({"id": 2, "type": "resume"})",
      R"({"id": 3, "type": "step", "n": 2})",
      R"({"id": 4, "type": "set_speed", "ticks_per_second": 50})",
      R"({"id": 5, "type": "intervene", "action": "toggle", "target": "biases", "value": false})",
      R"({"id": 6, "type": "reset_habits"})",
      R"({"id": 7, "type": "snapshot_request", "view": "metrics"})",
      R"({"id": 8, "type": "replay_log"})",
      R"({"id": 9, "type": "intervene", "action": "shift_priority",
          "criterion": "price", "delta": -1000})",
  };
  for (const auto& c : cmds) s.submit(c);
  CHECK(s.drain_events().empty());
  s.process_commands();
  const auto ev = s.drain_events();
  std::map<std::int64_t, int> replies;
  for (const auto& e : ev) {
    if (e["type"] == "ack" || e["type"] == "error") ++replies[e["id"].get<std::int64_t>()];
  }
  CHECK(replies.size() == cmds.size());
  for (const auto& [id, n] : replies) CHECK(n == 1);
  CHECK(s.speed() == 50);
  CHECK_FALSE(s.paused());

  // state_view precedes its ack
  for (std::int64_t id : {7, 8}) {
    std::ptrdiff_t view_at = -1;
    std::ptrdiff_t ack_at = -1;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      if (ev[i]["id"] != id) continue;
      if (ev[i]["type"] == "state_view") view_at = static_cast<std::ptrdiff_t>(i);
      if (ev[i]["type"] == "ack") ack_at = static_cast<std::ptrdiff_t>(i);
    }
    CHECK(view_at >= 0);
    CHECK(view_at < ack_at);
  }
}

TEST_CASE("commands apply between ticks only") {
  SteeringSession s(default_calibration(), config());
  CHECK(s.paused());
  CHECK_FALSE(s.advance());
  s.submit(R"({"id": 1, "type": "step", "n": 3})");
  CHECK_FALSE(s.advance());
  s.process_commands();
  s.drain_events();
  for (int i = 1; i <= 3; ++i) REQUIRE(s.advance());
  CHECK_FALSE(s.advance());
  const auto ticks = of_type(s.drain_events(), "tick_metrics");
  REQUIRE(ticks.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(ticks[i]["tick"] == i + 1);
  CHECK(s.simulation().tick() == 3);

  s.submit(R"({"id": 2, "type": "resume"})");
  s.process_commands();
  CHECK(s.advance());
  CHECK(s.advance());
  s.submit(R"({"id": 3, "type": "pause"})");
  s.process_commands();
  CHECK_FALSE(s.advance());
  CHECK(s.simulation().tick() == 5);
}

TEST_CASE("views") {
  SteeringSession s(default_calibration(), config(2, 40));
  for (const char* v : {"metrics", "agents", "layout", "priorities_histogram", "values_histogram"}) {
    s.submit(json{{"id", 1}, {"type", "snapshot_request"}, {"view", v}}.dump());
  }
  s.process_commands();
  const auto views = of_type(s.drain_events(), "state_view");
  REQUIRE(views.size() == 5);
  CHECK(views[0]["data"]["tick"] == 0);
  CHECK(views[1]["data"].size() == 40);
  CHECK(views[1]["data"][0].contains("satisfaction"));
  CHECK(views[2]["data"]["bike"]["safety"].is_number());

  for (std::size_t k : {3u, 4u}) {
    const json& d = views[k]["data"];
    CHECK(d["bins"] == 10);
    std::size_t total = 0;
    for (const auto& [mode, crits] : d["by_mode"].items()) {
      for (const auto& [crit, bins] : crits.items()) {
        REQUIRE(bins.size() == 10);
        for (const auto& b : bins) total += b.get<std::size_t>();
      }
    }
    // priorities: one entry per agent and criterion; values: per agent, mode and criterion
    CHECK(total == (k == 3 ? 40u * 6 : 40u * 24));
  }
}

TEST_CASE("a full outbox drops the oldest tick metrics") {
  SteeringOptions opts;
  opts.outbox_capacity = 4;
  SteeringSession s(default_calibration(), config(), opts);
  s.submit(R"({"id": 1, "type": "step", "n": 10})");
  s.process_commands();
  while (s.advance()) {
  }
  const auto ev = s.drain_events();
  CHECK(ev.size() == 4);
  CHECK(ev[0]["type"] == "ack");
  const auto ticks = of_type(ev, "tick_metrics");
  REQUIRE(ticks.size() == 3);
  CHECK(ticks[0]["tick"] == 8);
  CHECK(ticks[2]["tick"] == 10);
  CHECK(s.dropped_events() == 7);
}

TEST_CASE("replay log") {
  SteeringSession s(default_calibration(), config());
  CHECK(s.replay_log().events.empty());
  s.submit(R"({"id": 1, "type": "step", "n": 50})");
  s.process_commands();
  while (s.advance()) {
  }
  s.submit(R"({"id": 2, "type": "reset_habits"})");
  s.process_commands();
  const json log = s.replay_log().to_json();
  CHECK(log["events"] == json::parse(R"([{"at": 50, "action": "reset_habits"}])"));
  CHECK(log["config"]["ticks"] == 50);
}

TEST_CASE("an interactive session replays headlessly") {
  const SimConfig cfg = config(7, 80);
  SteeringSession s(default_calibration(), cfg);
  auto run = [&](std::uint64_t n) {
    s.submit(json{{"id", 0}, {"type", "step"}, {"n", n}}.dump());
    s.process_commands();
    while (s.advance()) {
    }
  };
  run(12);
  s.submit(R"({"id": 1, "type": "intervene", "action": "set_value", "mode": "bike",
               "criterion": "safety", "value": 90})");
  s.submit(R"({"id": 2, "type": "intervene", "action": "shift_priority",
               "criterion": "price", "delta": 2})");
  run(20);
  s.submit(R"({"id": 3, "type": "reset_habits"})");
  s.submit(R"({"id": 4, "type": "intervene", "action": "toggle", "target": "habits", "value": false})");
  run(25);

  std::vector<std::string> live;
  for (auto& e : of_type(s.drain_events(), "tick_metrics")) {
    e.erase("type");
    live.push_back(e.dump());
  }
  const Scenario replay = Scenario::parse(s.replay_log().to_json().dump());
  CHECK(replay.events.size() == 4);
  const SeedRun headless = run_seed(replay, default_calibration(), cfg.seed);
  REQUIRE(headless.snapshots.size() == live.size());
  for (std::size_t i = 0; i < live.size(); ++i) {
    CHECK(headless.snapshots[i].to_json().dump() == live[i]);
  }
}

TEST_CASE("paced run loop") {
  SteeringOptions opts;
  opts.initial_speed = 1000;
  SteeringSession s(default_calibration(), config(), opts);
  std::jthread t([&](std::stop_token st) { s.run(st); });
  s.submit(R"({"id": 1, "type": "resume"})");
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  s.submit(R"({"id": 2, "type": "pause"})");
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  t.request_stop();
  t.join();
  const auto ticks = of_type(s.drain_events(), "tick_metrics");
  CHECK(ticks.size() >= 5);
  CHECK(ticks.size() <= 200);
  CHECK(s.paused());
}

TEST_CASE("websocket round trip") {
  namespace beast = boost::beast;
  namespace http = beast::http;
  namespace websocket = beast::websocket;
  using tcp = boost::asio::ip::tcp;

  const fs::path root = fs::temp_directory_path() / "modalsim_test_server";
  fs::remove_all(root);
  fs::create_directories(root / "www");
  fs::create_directories(root / "logs");
  std::ofstream(root / "www" / "index.html") << "<p>dash</p>";

  ServerOptions opts;
  opts.port = 0;
  opts.static_dir = root / "www";
  opts.log_dir = root / "logs";
  SteeringServer server(default_calibration(), config(3, 50), opts);
  server.start();
  REQUIRE(server.port() != 0);
  const std::string port = std::to_string(server.port());

  boost::asio::io_context ioc;
  tcp::resolver resolver(ioc);
  const auto endpoints = resolver.resolve("127.0.0.1", port);

  auto get = [&](const std::string& target) {
    beast::tcp_stream stream(ioc);
    stream.connect(endpoints);
    http::request<http::empty_body> req{http::verb::get, target, 11};
    req.set(http::field::host, "127.0.0.1");
    http::write(stream, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(stream, buf, res);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    return res;
  };
  const auto index = get("/");
  CHECK(index.result() == http::status::ok);
  CHECK(index.body() == "<p>dash</p>");
  CHECK(index[http::field::content_type] == "text/html");
  CHECK(get("/missing.js").result() == http::status::not_found);
  CHECK(get("/../secret").result() == http::status::bad_request);

  {
    websocket::stream<tcp::socket> ws(ioc);
    boost::asio::connect(ws.next_layer(), endpoints);
    ws.handshake("127.0.0.1", "/");
    auto read = [&] {
      beast::flat_buffer buf;
      ws.read(buf);
      return json::parse(beast::buffers_to_string(buf.data()));
    };
    ws.text(true);
    ws.write(boost::asio::buffer(std::string(R"({"id": 1, "type": "step", "n": 3})")));
    std::vector<json> got;
    while (of_type(got, "tick_metrics").size() < 3) got.push_back(read());
    CHECK(got[0] == json{{"type", "ack"}, {"id", 1}});
    const auto ticks = of_type(got, "tick_metrics");
    for (int i = 0; i < 3; ++i) CHECK(ticks[i]["tick"] == i + 1);

    ws.write(boost::asio::buffer(std::string(R"({"id": 2, "type": "jump"})")));
    const json err = read();
    CHECK(err["type"] == "error");
    CHECK(err["id"] == 2);

    ws.write(boost::asio::buffer(std::string(R"({"id": 3, "type": "reset_habits"})")));
    CHECK(read() == json{{"type", "ack"}, {"id", 3}});
    ws.close(websocket::close_code::normal);
  }

  server.stop();
  std::vector<fs::path> logs(fs::directory_iterator(root / "logs"), fs::directory_iterator{});
  REQUIRE(logs.size() == 1);
  CHECK(logs[0].filename() == "session0_seed3.json");
  std::ifstream in(logs[0]);
  const json log = json::parse(in);
  CHECK(log["events"] == json::parse(R"([{"at": 3, "action": "reset_habits"}])"));
}
