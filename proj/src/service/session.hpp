#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>

#include <json.hpp>

#include "common/error.hpp"
#include "episodes/episode.hpp"
#include "episodes/policy.hpp"

namespace hideseek::service {

enum class SessionMode { HumanHider, Spectate };

// One interactive episode driven by a client. Turn-based: the world advances
// only on an action. Every reply is a protocol message.
class Session {
 public:
  Session(const sim::Simulator& sim, std::string id, SessionMode mode = SessionMode::HumanHider);

  const std::string& id() const { return id_; }
  SessionMode mode() const { return mode_; }
  const sim::WorldState& state() const { return state_; }
  const episodes::EpisodeRecord& record() const { return record_; }
  bool done() const;

  // Starts a fresh episode and returns its initial state message.
  nlohmann::json reset(std::uint64_t seed);
  // Applies one hider primitive, steps the seeker, returns the state message.
  // Throws InvalidArgument for an unknown command and Domain once done.
  nlohmann::json act(sim::MotionPrimitive cmd);
  nlohmann::json state_message() const;

  // Bank entry of the finished episode. SessionActive while the episode is
  // still running, InvalidArgument when no action was taken.
  episodes::HumanTrajectory export_entry() const;

 private:
  const sim::Simulator* sim_;
  std::string id_;
  SessionMode mode_;
  sim::WorldState state_;
  episodes::EpisodeRecord record_;
};

// Serializes appends to one trajectory-bank file across sessions.
class BankWriter {
 public:
  explicit BankWriter(std::filesystem::path path) : path_(std::move(path)) {}
  void append(const episodes::HumanTrajectory& entry);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::mutex mu_;
  std::filesystem::path path_;
};

// Handles one client text frame and returns the reply:
//   {type:"action", cmd}  -> state
//   {type:"reset", seed}  -> state
//   {type:"save"}         -> {type:"saved", primitives} (needs a bank)
// Failures become {type:"error", code, detail}.
nlohmann::json handle_message(Session& session, const std::string& text, BankWriter* bank);

// Protocol codes carried in error messages.
std::string protocol_error_code(Errc code);

nlohmann::json error_message(const std::string& code, const std::string& detail);

// Standard base64 (RFC 4648) with padding.
std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace hideseek::service
