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


#include "modalsim/steering_server.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace modalsim {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

constexpr auto kHttpTimeout = std::chrono::seconds(30);

class WsSession;

// State every connection reads; only the registry and counter mutate.
struct Shared {
  CalibrationData calib;
  SimConfig config;
  ServerOptions options;
  std::atomic<std::uint64_t> next_session{0};
  std::mutex registry_mu;
  std::vector<std::weak_ptr<WsSession>> registry;
};

beast::string_view mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".csv") return "text/csv";
  return "application/octet-stream";
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(beast::tcp_stream&& stream, std::shared_ptr<Shared> shared)
      : ws_(std::move(stream)), shared_(std::move(shared)) {}

  ~WsSession() { finish(); }

  void start(http::request<http::string_body> req) {
    beast::get_lowest_layer(ws_).expires_never();
    ws_.set_option(
        websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept,
                                                    shared_from_this()));
  }

  // Called on the I/O thread.
  void shutdown() {
    finish();
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    try {
      session_ = std::make_unique<SteeringSession>(
          shared_->calib, shared_->config, shared_->options.steering);
    } catch (const std::exception& e) {
      std::cerr << "modalsim: session setup failed: " << e.what() << "\n";
      shutdown();
      return;
    }
    index_ = shared_->next_session++;
    {
      std::lock_guard lock(shared_->registry_mu);
      auto& reg = shared_->registry;
      std::erase_if(reg, [](const auto& w) { return w.expired(); });
      reg.push_back(weak_from_this());
    }
    session_->set_notifier(
        [weak = weak_from_this(), ex = ws_.get_executor()] {
          asio::post(ex, [weak] {
            if (auto self = weak.lock()) self->pump();
          });
        });
    sim_thread_ = std::jthread(
        [s = session_.get()](std::stop_token st) { s->run(st); });
    read();
  }

  void read() {
    ws_.async_read(in_, beast::bind_front_handler(&WsSession::on_read,
                                                  shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      finish();
      return;
    }
    session_->submit(beast::buffers_to_string(in_.data()));
    in_.consume(in_.size());
    read();
  }

  // One write in flight; the next event is taken only when it completes, so
  // a slow client leaves events in the session outbox where old metrics get
  // dropped.
  void pump() {
    if (writing_ || finished_) return;
    auto event = session_->next_event();
    if (!event) return;
    writing_ = true;
    out_ = event->dump();
    ws_.text(true);
    ws_.async_write(asio::buffer(out_),
                    beast::bind_front_handler(&WsSession::on_write,
                                              shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) {
      finish();
      return;
    }
    pump();
  }

  void finish() {
    if (finished_ || !session_) return;
    finished_ = true;
    if (sim_thread_.joinable()) {
      sim_thread_.request_stop();
      sim_thread_.join();
    }
    write_log();
  }

  void write_log() const {
    const auto& dir = shared_->options.log_dir;
    if (dir.empty()) return;
    try {
      std::filesystem::create_directories(dir);
      const auto path = dir / ("session" + std::to_string(index_) + "_seed" +
                               std::to_string(shared_->config.seed) + ".json");
      std::ofstream out(path);
      out << session_->replay_log().to_json().dump(2) << "\n";
      if (!out) throw std::runtime_error("cannot write " + path.string());
    } catch (const std::exception& e) {
      std::cerr << "modalsim: replay log not saved: " << e.what() << "\n";
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Shared> shared_;
  std::unique_ptr<SteeringSession> session_;
  std::jthread sim_thread_;
  beast::flat_buffer in_;
  std::string out_;
  bool writing_ = false;
  bool finished_ = false;
  std::uint64_t index_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
      : stream_(std::move(socket)), shared_(std::move(shared)) {}

  void start() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(kHttpTimeout);
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpSession::on_read,
                                               shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      std::make_shared<WsSession>(std::move(stream_), shared_)
          ->start(std::move(req_));
      return;
    }
    respond();
  }

  template <typename Body>
  void send(http::response<Body>&& res) {
    auto sp = std::make_shared<http::response<Body>>(std::move(res));
    http::async_write(
        stream_, *sp,
        [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
          if (ec) return;
          if (sp->need_eof()) {
            self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
          }
          self->read();
        });
  }

  void send_text(http::status status, std::string body) {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::content_type, "text/plain");
    res.keep_alive(req_.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    send(std::move(res));
  }

  void respond() {
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      send_text(http::status::method_not_allowed, "method not allowed\n");
      return;
    }
    std::string target(req_.target());
    target = target.substr(0, target.find_first_of("?#"));
    if (target.empty() || target[0] != '/' ||
        target.find("..") != std::string::npos) {
      send_text(http::status::bad_request, "bad request\n");
      return;
    }
    const auto& root = shared_->options.static_dir;
    if (root.empty()) {
      send_text(http::status::not_found, "not found\n");
      return;
    }
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path path = root / target.substr(1);

    beast::error_code ec;
    http::file_body::value_type file;
    file.open(path.string().c_str(), beast::file_mode::scan, ec);
    if (ec) {
      send_text(http::status::not_found, "not found\n");
      return;
    }
    const auto size = file.size();
    if (req_.method() == http::verb::head) {
      http::response<http::empty_body> res{http::status::ok, req_.version()};
      res.set(http::field::content_type, mime_type(path));
      res.content_length(size);
      res.keep_alive(req_.keep_alive());
      send(std::move(res));
      return;
    }
    http::response<http::file_body> res{
        std::piecewise_construct, std::make_tuple(std::move(file)),
        std::make_tuple(http::status::ok, req_.version())};
    res.set(http::field::content_type, mime_type(path));
    res.content_length(size);
    res.keep_alive(req_.keep_alive());
    send(std::move(res));
  }

  beast::tcp_stream stream_;
  std::shared_ptr<Shared> shared_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct SteeringServer::Impl {
  std::shared_ptr<Shared> shared;
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread io_thread;
  std::uint16_t port = 0;

  std::mutex state_mu;
  std::condition_variable state_cv;
  bool running = false;

  void accept() {
    acceptor.async_accept(
        asio::make_strand(ioc),
        [this](beast::error_code ec, tcp::socket socket) {
          if (ec) return;  // closed by stop()
          std::make_shared<HttpSession>(std::move(socket), shared)->start();
          accept();
        });
  }
};

SteeringServer::SteeringServer(CalibrationData calib, SimConfig config,
                               ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  config.validate();
  calib.validate();
  impl_->shared = std::make_shared<Shared>();
  impl_->shared->calib = std::move(calib);
  impl_->shared->config = config;
  impl_->shared->options = std::move(options);
}

SteeringServer::~SteeringServer() { stop(); }

void SteeringServer::start() {
  std::lock_guard lock(impl_->state_mu);
  if (impl_->running) return;
  const auto& opts = impl_->shared->options;
  try {
    const tcp::endpoint ep{asio::ip::make_address(opts.address), opts.port};
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen(asio::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    throw std::runtime_error("cannot listen on " + opts.address + ":" +
                             std::to_string(opts.port) + ": " + e.what());
  }
  impl_->port = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->running = true;
  impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
}

void SteeringServer::stop() {
  {
    std::lock_guard lock(impl_->state_mu);
    if (!impl_->running) return;
    impl_->running = false;
  }
  asio::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    std::lock_guard lock(impl->shared->registry_mu);
    for (auto& w : impl->shared->registry) {
      if (auto s = w.lock()) s->shutdown();
    }
    // Idle keep-alive HTTP connections are dropped with the context.
    impl->ioc.stop();
  });
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  impl_->state_cv.notify_all();
}

void SteeringServer::wait() {
  std::unique_lock lock(impl_->state_mu);
  impl_->state_cv.wait(lock, [this] { return !impl_->running; });
}

std::uint16_t SteeringServer::port() const { return impl_->port; }

}  // namespace modalsim
