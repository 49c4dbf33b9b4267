#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "common/rng.hpp"
#include "episodes/episode.hpp"
#include "perception/raster.hpp"
#include "service/server.hpp"

using namespace hideseek;
using namespace hideseek::service;
using nlohmann::json;
using sim::MotionPrimitive;

namespace {

namespace beast = boost::beast;
using tcp = boost::asio::ip::tcp;

class WsClient {
 public:
  explicit WsClient(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    boost::asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1:" + std::to_string(port), "/");
  }
  ~WsClient() {
    beast::error_code ec;
    ws_.close(beast::websocket::close_code::normal, ec);
  }
  json request(const json& msg) { return request_raw(msg.dump()); }
  json request_raw(const std::string& text) {
    ws_.write(boost::asio::buffer(text));
    return receive();
  }
  json receive() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

 private:
  boost::asio::io_context ioc_;
  beast::websocket::stream<tcp::socket> ws_;
};

json action(const char* cmd) { return {{"type", "action"}, {"cmd", cmd}}; }
json reset(std::uint64_t seed) { return {{"type", "reset"}, {"seed", seed}}; }

sim::Scenario short_scenario(int max_steps) {
  sim::Scenario s;
  s.obs_resolution = 64;
  s.max_steps = max_steps;
  return s;
}

const char* kCmds[] = {"Forward", "Backward", "RotateLeft", "RotateRight", "Stay"};

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("base64 round-trip") {
    Rng rng(1);
    for (std::size_t n = 0; n < 40; ++n) {
      std::vector<std::uint8_t> bytes(n);
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
      CHECK(base64_decode(base64_encode(bytes)) == bytes);
    }
    CHECK(base64_encode({'f', 'o', 'o', 'b'}) == "Zm9vYg==");
    CHECK_THROWS_AS(base64_decode("abc"), Error);
  }

  TEST_CASE("reset then five forwards yields steps 1..5") {
    const sim::Simulator sim(short_scenario(200));
    Session s(sim, "a");
    const auto r = handle_message(s, reset(7).dump(), nullptr);
    CHECK(r["type"] == "state");
    CHECK(r["step"] == 0);
    for (int i = 1; i <= 5; ++i) {
      const auto m = handle_message(s, action("Forward").dump(), nullptr);
      CHECK(m["type"] == "state");
      CHECK(m["step"] == i);
    }
  }

  TEST_CASE("state frames are the hider's view") {
    const sim::Simulator sim(short_scenario(200));
    Session s(sim, "a");
    const auto m = s.reset(3);
    const auto png = base64_decode(m["hider_view_png_base64"].get<std::string>());
    CHECK(perception::decode_png(png) == sim.hider_view(s.state()));
  }

  TEST_CASE("caught episode ends and rejects further actions") {
    sim::Scenario sc = short_scenario(200);
    sc.arena.obstacles.clear();
    sc.start = sim::StartPoses{{900, 600, 180}, {400, 600, 0}};
    const sim::Simulator sim(sc);
    Session s(sim, "a");
    json last;
    for (int i = 0; i < 200 && !s.done(); ++i) last = handle_message(s, action("Stay").dump(), nullptr);
    CHECK(last["caught"] == true);
    CHECK(last["done"] == true);
    const auto err = handle_message(s, action("Forward").dump(), nullptr);
    CHECK(err["type"] == "error");
    CHECK(err["code"] == "EpisodeDone");
  }

  TEST_CASE("malformed messages get error replies") {
    const sim::Simulator sim(short_scenario(200));
    Session s(sim, "a");
    CHECK(handle_message(s, "not json", nullptr)["code"] == "MalformedMessage");
    CHECK(handle_message(s, R"({"type":"dance"})", nullptr)["code"] == "MalformedMessage");
    CHECK(handle_message(s, R"({"type":"action","cmd":"Jump"})", nullptr)["code"] == "InvalidAction");
    CHECK(handle_message(s, R"({"type":"action"})", nullptr)["code"] == "InvalidAction");
    CHECK(handle_message(s, R"({"type":"save"})", nullptr)["code"] == "NoBank");
    CHECK(s.state().step == 0);
  }

  TEST_CASE("export of a finished session replays to the same record") {
    const sim::Simulator sim(short_scenario(30));
    Session s(sim, "a");
    s.reset(11);
    CHECK_THROWS_AS(s.export_entry(), Error);
    Rng rng(5);
    while (!s.done()) s.act(static_cast<MotionPrimitive>(rng.range(0, 4)));
    const auto entry = s.export_entry();
    if (s.state().caught) {
      CHECK(entry.primitives.size() == static_cast<std::size_t>(s.state().step));
    } else {
      CHECK(entry.primitives.size() == 30);
    }
    const auto replay = episodes::replay_episode(sim, entry.primitives, *entry.seed, entry.start);
    CHECK(replay == s.record());

    try {
      Session active(sim, "b");
      active.act(MotionPrimitive::Forward);
      active.export_entry();
      FAIL("expected SessionActive");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SessionActive);
    }
  }

  TEST_CASE("empty finished session cannot be exported") {
    sim::Scenario sc = short_scenario(0);
    const sim::Simulator sim(sc);
    Session s(sim, "a");
    CHECK(s.done());
    CHECK_THROWS_AS(s.export_entry(), Error);
  }

  TEST_CASE("interleaved sessions match serial runs") {
    const sim::Simulator sim(short_scenario(120));
    Rng rng(9);
    std::vector<std::string> script_a, script_b;
    script_a.push_back(reset(4).dump());
    script_b.push_back(reset(4).dump());
    for (int i = 0; i < 150; ++i) {
      script_a.push_back(action(kCmds[rng.below(5)]).dump());
      script_b.push_back(rng.bernoulli(0.1) ? reset(rng.below(10)).dump() : action(kCmds[rng.below(5)]).dump());
    }
    std::vector<json> serial_a, serial_b, mixed_a, mixed_b;
    {
      Session a(sim, "a"), b(sim, "b");
      for (const auto& m : script_a) serial_a.push_back(handle_message(a, m, nullptr));
      for (const auto& m : script_b) serial_b.push_back(handle_message(b, m, nullptr));
    }
    {
      Session a(sim, "a"), b(sim, "b");
      std::size_t i = 0, j = 0;
      while (i < script_a.size() || j < script_b.size()) {
        if (j >= script_b.size() || (i < script_a.size() && rng.bernoulli(0.5))) {
          mixed_a.push_back(handle_message(a, script_a[i++], nullptr));
        } else {
          mixed_b.push_back(handle_message(b, script_b[j++], nullptr));
        }
      }
    }
    CHECK(serial_a == mixed_a);
    CHECK(serial_b == mixed_b);
    // Lockstep: one reply per message, a state for every accepted one.
    CHECK(serial_a.size() == script_a.size());
  }

  TEST_CASE("websocket server: concurrent sessions with equal inputs stream equal states") {
    const sim::Simulator sim(short_scenario(200));
    Server server(sim, {"127.0.0.1:0", std::nullopt, 0, SessionMode::HumanHider});
    server.start();
    REQUIRE(server.port() != 0);
    WsClient c1(server.port());
    WsClient c2(server.port());
    Session local(sim, "ref");
    const auto first = c1.request(reset(7));
    CHECK(first == local.reset(7));
    CHECK(c2.request(reset(7)) == first);
    for (int i = 1; i <= 5; ++i) {
      const auto a = c1.request(action("Forward"));
      const auto b = c2.request(action("Forward"));
      CHECK(a["step"] == i);
      CHECK(a == b);
      CHECK(a == local.act(MotionPrimitive::Forward));
    }
    CHECK(c1.request_raw("{")["type"] == "error");
    CHECK(c1.request(action("Stay"))["step"] == 6);
    server.stop();
  }

  TEST_CASE("websocket server: save appends to the bank") {
    const auto bank = std::filesystem::temp_directory_path() / "hideseek_service_bank.json";
    std::filesystem::remove(bank);
    const sim::Simulator sim(short_scenario(12));
    Server server(sim, {"127.0.0.1:0", bank, 0, SessionMode::HumanHider});
    server.start();
    {
      WsClient c(server.port());
      c.request(reset(2));
      CHECK(c.request({{"type", "save"}})["code"] == "SessionActive");
      json m;
      do {
        m = c.request(action("RotateLeft"));
      } while (!m["done"].get<bool>());
      const auto saved = c.request({{"type", "save"}});
      CHECK(saved["type"] == "saved");
      CHECK(saved["primitives"] == m["step"]);
    }
    server.stop();
    const auto b = episodes::load_bank(bank);
    REQUIRE(b.trajectories.size() == 1);
    CHECK(b.trajectories[0].seed == std::optional<std::uint64_t>(2));
    std::filesystem::remove(bank);
  }

  TEST_CASE("websocket server: auto-step advances idle sessions") {
    const sim::Simulator sim(short_scenario(200));
    Server server(sim, {"127.0.0.1:0", std::nullopt, 30, SessionMode::HumanHider});
    server.start();
    WsClient c(server.port());
    CHECK(c.request(reset(1))["step"] == 0);
    const auto ticked = c.receive();
    CHECK(ticked["type"] == "state");
    CHECK(ticked["step"] == 1);
    server.stop();
  }

  TEST_CASE("bind errors") {
    const sim::Simulator sim(short_scenario(10));
    Server first(sim, {"127.0.0.1:0", std::nullopt, 0, SessionMode::HumanHider});
    const std::string taken = "127.0.0.1:" + std::to_string(first.port());
    for (const std::string& bad : std::vector<std::string>{"nonsense", "127.0.0.1:99999", "999.1.1.1:80", taken}) {
      try {
        Server s(sim, {bad, std::nullopt, 0, SessionMode::HumanHider});
        FAIL("expected BindError for " << bad);
      } catch (const Error& e) {
        CHECK(e.code() == Errc::Bind);
      }
    }
  }

  TEST_CASE("bind address comes from the environment") {
    ::setenv(kBindEnv, "0.0.0.0:9999", 1);
    CHECK(default_bind_address() == "0.0.0.0:9999");
    ::unsetenv(kBindEnv);
    CHECK(default_bind_address() == kDefaultBind);
  }
}
