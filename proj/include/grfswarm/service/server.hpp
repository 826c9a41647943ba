#ifndef GRFSWARM_SERVICE_SERVER_HPP_
#define GRFSWARM_SERVICE_SERVER_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "../engine.hpp"
#include "../metrics.hpp"
#include "protocol.hpp"

namespace grfswarm::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct ServeOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080; // 0 picks a free port
  double tick_rate_hz = 30.0;
  int frame_stride = 3;
  std::string session_log; // empty: no replay log
};

/// Multi-producer single-consumer command queue.
class CommandQueue {
public:
  void push(Command cmd) {
    std::lock_guard lock(mu_);
    items_.push_back(std::move(cmd));
  }
  std::deque<Command> drain() {
    std::lock_guard lock(mu_);
    return std::exchange(items_, {});
  }

private:
  std::mutex mu_;
  std::deque<Command> items_;
};

class LiveServer;

/// One websocket client. Lives on the io thread only.
class Session : public std::enable_shared_from_this<Session> {
public:
  Session(tcp::socket socket, LiveServer &server) : ws_(std::move(socket)), server_(server) {}

  void start(http::request<http::string_body> req);
  void send(std::shared_ptr<const std::string> msg);
  void close() {
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

private:
  void read_loop();
  void write_next();

  websocket::stream<beast::tcp_stream> ws_;
  LiveServer &server_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> outbox_;
  bool open_ = false;
};

/// Runs the engine at a wall-clock tick rate, broadcasts frames on /ws and
/// applies client commands between ticks.
///
/// Threads: one driver owning all simulation state, one io thread owning all
/// sockets. Frames cross from driver to io via asio::post; commands cross the
/// other way through CommandQueue.
class LiveServer {
public:
  LiveServer(Scenario scenario, std::uint64_t seed, ServeOptions opt)
      : scenario_(std::move(scenario)), seed_(seed), opt_(std::move(opt)),
        acceptor_(ioc_), tick_rate_(opt_.tick_rate_hz) {}

  ~LiveServer() { stop(); }

  /// Binds and starts both threads. Throws on bind failure.
  void start() {
    world_ = init_world(scenario_, seed_);
    tcp::endpoint ep(asio::ip::make_address(opt_.address), opt_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    if (!opt_.session_log.empty()) {
      log_.open(opt_.session_log, std::ios::trunc);
      nlohmann::json head = {{"session", {{"seed", seed_}}}};
      log_ << head.dump() << '\n' << std::flush;
    }
    publish(encode_current());
    accept();
    io_thread_ = std::thread([this] { ioc_.run(); });
    driver_ = std::thread([this] { drive(); });
  }

  void stop() {
    if (stopping_.exchange(true)) return;
    wake_.notify_all();
    if (driver_.joinable()) driver_.join();
    ioc_.stop();
    if (io_thread_.joinable()) io_thread_.join();
    // The io thread is gone, so sockets can be closed from here.
    beast::error_code ec;
    acceptor_.close(ec);
    for (auto &s : sessions_) s->close();
    sessions_.clear();
  }

  unsigned short port() const { return port_; }
  void submit(Command cmd) {
    commands_.push(std::move(cmd));
    wake_.notify_all();
  }

  /// Copy of the simulation state; safe from any thread.
  WorldState snapshot() const {
    std::lock_guard lock(state_mu_);
    return world_;
  }
  std::int64_t steps_taken() const { return steps_.load(); }
  bool paused() const { return paused_.load(); }

  // Session callbacks, io thread only.
  void on_join(const std::shared_ptr<Session> &s) {
    sessions_.insert(s);
    if (latest_) s->send(latest_);
  }
  void on_leave(const std::shared_ptr<Session> &s) { sessions_.erase(s); }
  void on_message(const std::shared_ptr<Session> &s, const std::string &text) {
    WorldState view = snapshot();
    auto decoded = decode_command(text, view, scenario_);
    if (auto *rej = std::get_if<Rejection>(&decoded)) {
      s->send(std::make_shared<const std::string>(encode_error(*rej)));
      return;
    }
    submit(std::get<Command>(std::move(decoded)));
  }

private:
  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto stream = std::make_shared<beast::tcp_stream>(std::move(socket));
      auto buf = std::make_shared<beast::flat_buffer>();
      auto req = std::make_shared<http::request<http::string_body>>();
      http::async_read(*stream, *buf, *req,
                       [this, stream, buf, req](beast::error_code ec, std::size_t) {
                         if (ec) return;
                         if (!websocket::is_upgrade(*req) || req->target() != "/ws") {
                           auto res = std::make_shared<http::response<http::string_body>>(
                               http::status::not_found, req->version());
                           res->set(http::field::content_type, "text/plain");
                           res->body() = "websocket endpoint is /ws\n";
                           res->prepare_payload();
                           http::async_write(*stream, *res, [stream, res](beast::error_code, std::size_t) {
                             beast::error_code ignored;
                             stream->socket().shutdown(tcp::socket::shutdown_both, ignored);
                           });
                           return;
                         }
                         std::make_shared<Session>(stream->release_socket(), *this)->start(std::move(*req));
                       });
      accept();
    });
  }

  std::shared_ptr<const std::string> encode_current() {
    auto graph = bond_graph(world_, scenario_);
    auto metrics = measure(world_, graph, scenario_);
    return std::make_shared<const std::string>(
        encode_frame(world_, graph, metrics, scenario_, paused_.load()));
  }

  void publish(std::shared_ptr<const std::string> frame) {
    asio::post(ioc_, [this, frame] {
      latest_ = frame;
      for (const auto &s : sessions_) s->send(frame);
    });
  }

  /// Applies queued commands; returns true if anything visible changed.
  bool apply_pending() {
    bool changed = false;
    for (auto &cmd : commands_.drain()) {
      cmd.issue_tick = steps_.load();
      if (std::holds_alternative<Pause>(cmd.kind)) {
        paused_ = true;
      } else if (std::holds_alternative<Resume>(cmd.kind)) {
        paused_ = false;
      } else if (auto *r = std::get_if<SetTickRate>(&cmd.kind)) {
        if (r->hz > 0.0) tick_rate_ = r->hz;
      } else {
        try {
          auto next = apply_command(world_, scenario_, cmd);
          std::lock_guard lock(state_mu_);
          world_ = std::move(next);
        } catch (const CommandError &) {
          continue; // world moved on since the command was validated
        }
      }
      changed = true;
      if (log_.is_open()) {
        nlohmann::json rec = {{"step", cmd.issue_tick}, {"command", command_payload(cmd, scenario_)}};
        log_ << rec.dump() << '\n' << std::flush;
      }
    }
    return changed;
  }

  void drive() {
    using clock = std::chrono::steady_clock;
    auto next = clock::now();
    while (!stopping_) {
      bool dirty = apply_pending();
      if (!paused_) {
        WorldState stepped = step(world_, scenario_);
        {
          std::lock_guard lock(state_mu_);
          world_ = std::move(stepped);
        }
        const auto n = ++steps_;
        if (n % opt_.frame_stride == 0) dirty = true;
      }
      if (dirty) publish(encode_current());
      next += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / tick_rate_));
      const auto now = clock::now();
      if (next < now) next = now;
      std::unique_lock lock(wake_mu_);
      wake_.wait_until(lock, next, [this] { return stopping_.load(); });
    }
  }

  Scenario scenario_;
  std::uint64_t seed_;
  ServeOptions opt_;

  asio::io_context ioc_;
  tcp::acceptor acceptor_;
  unsigned short port_ = 0;
  std::thread io_thread_;
  std::thread driver_;

  // io thread
  std::set<std::shared_ptr<Session>> sessions_;
  std::shared_ptr<const std::string> latest_;

  // driver thread (world_ also read under state_mu_)
  mutable std::mutex state_mu_;
  WorldState world_;
  double tick_rate_;
  std::ofstream log_;
  std::atomic<std::int64_t> steps_{0};
  std::atomic<bool> paused_{false};

  CommandQueue commands_;
  std::atomic<bool> stopping_{false};
  std::mutex wake_mu_;
  std::condition_variable wake_;
};

inline void Session::start(http::request<http::string_body> req) {
  ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
  ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    self->open_ = true;
    self->server_.on_join(self);
    self->read_loop();
  });
}

inline void Session::read_loop() {
  ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->open_ = false;
      self->server_.on_leave(self);
      return;
    }
    std::string text = beast::buffers_to_string(self->buffer_.data());
    self->buffer_.consume(self->buffer_.size());
    self->server_.on_message(self, text);
    self->read_loop();
  });
}

inline void Session::send(std::shared_ptr<const std::string> msg) {
  if (!open_) return;
  outbox_.push_back(std::move(msg));
  if (outbox_.size() == 1) write_next();
}

inline void Session::write_next() {
  ws_.text(true);
  ws_.async_write(asio::buffer(*outbox_.front()),
                  [self = shared_from_this()](beast::error_code ec, std::size_t) {
                    if (ec) {
                      self->open_ = false;
                      self->outbox_.clear();
                      self->server_.on_leave(self);
                      return;
                    }
                    self->outbox_.pop_front();
                    if (!self->outbox_.empty()) self->write_next();
                  });
}

} // namespace grfswarm::service

#endif // GRFSWARM_SERVICE_SERVER_HPP_
