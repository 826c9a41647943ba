#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "grfswarm/service/server.hpp"

using namespace grfswarm;
using namespace grfswarm::service;
using namespace std::chrono_literals;

namespace {

const std::string kDir = GRFSWARM_SCENARIO_DIR;

Scenario bridge() { return load_scenario_file(kDir + "/bridge.json"); }

ServeOptions fast_options() {
  ServeOptions opt;
  opt.port = 0;
  opt.tick_rate_hz = 200.0;
  opt.frame_stride = 1;
  return opt;
}

/// Blocking websocket client for tests.
class Client {
public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/ws");
  }
  ~Client() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }

  nlohmann::json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return nlohmann::json::parse(beast::buffers_to_string(buf.data()));
  }
  void send(const std::string &text) { ws_.write(asio::buffer(text)); }

  /// Reads messages until pred holds or the deadline passes.
  template <class Pred> std::optional<nlohmann::json> read_until(Pred pred, std::chrono::milliseconds limit) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      auto msg = read();
      if (pred(msg)) return msg;
    }
    return std::nullopt;
  }

private:
  asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

bool is_frame(const nlohmann::json &m) { return m["type"] == "frame"; }

} // namespace

TEST(LiveServer, NewClientReceivesAFrame) {
  LiveServer server(bridge(), 1, fast_options());
  server.start();
  Client c(server.port());
  auto msg = c.read();
  EXPECT_EQ(msg["type"], "frame");
  EXPECT_EQ(msg["payload"]["robots"].size(), 22u);
}

TEST(LiveServer, TicksAreMonotonic) {
  LiveServer server(bridge(), 1, fast_options());
  server.start();
  Client c(server.port());
  std::int64_t last = -1;
  for (int k = 0; k < 30; ++k) {
    auto f = decode_frame(c.read().dump());
    EXPECT_GE(f.tick, last);
    last = f.tick;
  }
  EXPECT_GT(last, 0);
}

TEST(LiveServer, ClientsSeeIdenticalFrames) {
  LiveServer server(bridge(), 2, fast_options());
  server.start();
  Client a(server.port()), b(server.port());
  a.send(R"({"type":"command","payload":{"kind":"pause"}})");
  auto paused = [](const nlohmann::json &m) { return is_frame(m) && m["payload"]["paused"] == true; };
  auto fa = a.read_until(paused, 5s);
  auto fb = b.read_until(paused, 5s);
  ASSERT_TRUE(fa && fb);
  EXPECT_EQ(*fa, *fb);
}

TEST(LiveServer, PauseHoldsTheTick) {
  LiveServer server(bridge(), 3, fast_options());
  server.start();
  Client c(server.port());
  c.send(R"({"kind":"pause"})");
  ASSERT_TRUE(c.read_until([](const nlohmann::json &m) { return m["payload"]["paused"] == true; }, 5s));
  const auto held = server.steps_taken();
  std::this_thread::sleep_for(200ms);
  EXPECT_EQ(server.steps_taken(), held);
  EXPECT_TRUE(server.paused());
  c.send(R"({"kind":"resume"})");
  auto moving = c.read_until(
      [&](const nlohmann::json &m) { return is_frame(m) && m["payload"]["paused"] == false; }, 5s);
  ASSERT_TRUE(moving);
  std::this_thread::sleep_for(100ms);
  EXPECT_GT(server.steps_taken(), held);
}

TEST(LiveServer, MovedAnchorAppearsWithinOneSecond) {
  auto opt = fast_options();
  opt.tick_rate_hz = 30.0;
  opt.frame_stride = 3;
  LiveServer server(bridge(), 4, opt);
  server.start();
  Client c(server.port());
  c.read();
  const auto sent = std::chrono::steady_clock::now();
  c.send(R"({"type":"command","payload":{"kind":"move_anchor","id":1,"x":4.0,"y":3.5}})");
  auto seen = c.read_until(
      [](const nlohmann::json &m) {
        if (!is_frame(m)) return false;
        const auto &r = m["payload"]["robots"][1];
        return r["x"] == 4.0 && r["y"] == 3.5;
      },
      2s);
  ASSERT_TRUE(seen);
  EXPECT_LT(std::chrono::steady_clock::now() - sent, 1s);
}

TEST(LiveServer, BadCommandGetsErrorAndWorldContinues) {
  LiveServer server(bridge(), 5, fast_options());
  server.start();
  Client c(server.port());
  c.send(R"({"kind":"move_anchor","id":7,"x":1,"y":1})");
  auto err = c.read_until([](const nlohmann::json &m) { return m["type"] == "error"; }, 5s);
  ASSERT_TRUE(err);
  EXPECT_EQ((*err)["payload"]["field"], "id");
  EXPECT_EQ((*err)["payload"]["reason"], "not an anchor");
  c.send("{nope");
  err = c.read_until([](const nlohmann::json &m) { return m["type"] == "error"; }, 5s);
  ASSERT_TRUE(err);
  EXPECT_EQ((*err)["payload"]["reason"], "malformed JSON");
  EXPECT_TRUE(c.read_until(is_frame, 5s));
}

TEST(LiveServer, OtherPathsAreNotFound) {
  LiveServer server(bridge(), 6, fast_options());
  server.start();
  asio::io_context ioc;
  beast::tcp_stream stream(ioc);
  tcp::resolver resolver(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(server.port())));
  http::request<http::empty_body> req(http::verb::get, "/state", 11);
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  EXPECT_EQ(res.result(), http::status::not_found);
}

TEST(LiveServer, SessionLogReplaysToTheSameWorld) {
  const auto log = std::filesystem::temp_directory_path() / "grfswarm_session_test.jsonl";
  auto opt = fast_options();
  opt.session_log = log.string();
  const auto s = bridge();
  WorldState live;
  std::int64_t steps = 0;
  {
    LiveServer server(s, 9, opt);
    server.start();
    Client c(server.port());
    c.read();
    std::this_thread::sleep_for(50ms);
    c.send(R"({"kind":"move_anchor","id":1,"x":4.0,"y":3.5})");
    std::this_thread::sleep_for(50ms);
    c.send(R"({"kind":"pause"})");
    std::this_thread::sleep_for(50ms);
    c.send(R"({"kind":"add_anchor","species":"O","x":2.5,"y":3.5})");
    c.send(R"({"kind":"resume"})");
    std::this_thread::sleep_for(50ms);
    c.send(R"({"kind":"reset","seed":12})");
    std::this_thread::sleep_for(50ms);
    server.stop();
    live = server.snapshot();
    steps = server.steps_taken();
  }
  std::ifstream in(log);
  std::stringstream text;
  text << in.rdbuf();
  auto commands = parse_command_log(text.str(), s);
  ASSERT_EQ(commands.size(), 5u);
  auto replay = run(s, 9, {.ticks = static_cast<int>(steps), .commands = commands});
  EXPECT_EQ(replay.final_state, live);
  std::filesystem::remove(log);
}
