#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "service/session.hpp"

namespace hideseek::service {

struct ServerOptions {
  std::string bind;  // "host:port"; port 0 picks a free port
  std::optional<std::filesystem::path> bank;
  // When positive, a Stay is applied after this many idle milliseconds.
  int auto_step_ms = 0;
  SessionMode mode = SessionMode::HumanHider;
};

inline constexpr const char* kBindEnv = "HIDESEEK_BIND";
inline constexpr const char* kDefaultBind = "127.0.0.1:8765";
// HIDESEEK_BIND when set, else 127.0.0.1:8765.
std::string default_bind_address();

// WebSocket front end. Every connection gets its own Session and its own
// worker thread and event loop.
class Server {
 public:
  // Binds immediately; Bind error when the address is unusable.
  Server(const sim::Simulator& sim, ServerOptions opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  void start();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hideseek::service
