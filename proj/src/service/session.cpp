#include "service/session.hpp"

#include <openssl/evp.h>

#include "common/error.hpp"
#include "perception/raster.hpp"

namespace hideseek::service {

using sim::MotionPrimitive;

Session::Session(const sim::Simulator& sim, std::string id, SessionMode mode)
    : sim_(&sim), id_(std::move(id)), mode_(mode) {
  reset(sim.scenario().seed);
}

bool Session::done() const { return state_.caught || state_.step >= record_.max_steps; }

nlohmann::json Session::reset(std::uint64_t seed) {
  state_ = sim_->initial_state(seed);
  record_ = episodes::EpisodeRecord{};
  record_.scenario_hash = sim::scenario_hash(sim_->scenario());
  record_.seed = seed;
  record_.max_steps = sim_->scenario().max_steps;
  record_.start = {state_.hider, state_.seeker};
  return state_message();
}

nlohmann::json Session::act(MotionPrimitive cmd) {
  if (done()) fail(Errc::Domain, "episode is over; send reset");
  const auto r = sim_->tick(state_, cmd);
  record_.steps.push_back({cmd, state_.hider, r.seeker_cmd, state_.seeker, state_.caught});
  record_.terminal_step = state_.step;
  if (done()) {
    record_.cause = state_.caught ? episodes::TerminalCause::Caught : episodes::TerminalCause::MaxSteps;
    record_.hider_tail.assign(static_cast<std::size_t>(record_.max_steps - state_.step), MotionPrimitive::Stay);
  }
  return state_message();
}

nlohmann::json Session::state_message() const {
  // The player sees what the hider sees; a spectator sees the seeker's view.
  const auto view = mode_ == SessionMode::HumanHider ? sim_->hider_view(state_) : sim_->seeker_view(state_);
  return {{"type", "state"},
          {"step", state_.step},
          {"hider_view_png_base64", base64_encode(perception::encode_png(view))},
          {"caught", state_.caught},
          {"done", done()}};
}

episodes::HumanTrajectory Session::export_entry() const {
  if (!done()) fail(Errc::SessionActive, "session " + id_ + " is still running");
  if (record_.steps.empty()) fail(Errc::InvalidArgument, "session " + id_ + " has no actions");
  episodes::HumanTrajectory t;
  for (const auto& s : record_.steps) t.primitives.push_back(s.hider_cmd);
  t.seed = record_.seed;
  t.start = record_.start;
  return t;
}

void BankWriter::append(const episodes::HumanTrajectory& entry) {
  std::lock_guard lock(mu_);
  episodes::append_to_bank(entry, path_);
}

nlohmann::json handle_message(Session& session, const std::string& text, BankWriter* bank) {
  try {
    const auto msg = nlohmann::json::parse(text);
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
      return error_message("MalformedMessage", "expected an object with a string 'type'");
    }
    const auto type = msg["type"].get<std::string>();
    if (type == "action") {
      if (!msg.contains("cmd") || !msg["cmd"].is_string()) return error_message("InvalidAction", "missing 'cmd'");
      return session.act(sim::parse_primitive(msg["cmd"].get<std::string>()));
    }
    if (type == "reset") {
      const auto seed = msg.contains("seed") ? msg["seed"].get<std::uint64_t>() : session.record().seed;
      return session.reset(seed);
    }
    if (type == "save") {
      if (!bank) return error_message("NoBank", "service was started without a trajectory bank");
      const auto entry = session.export_entry();
      bank->append(entry);
      return {{"type", "saved"}, {"primitives", entry.primitives.size()}};
    }
    return error_message("MalformedMessage", "unknown message type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    return error_message("MalformedMessage", e.what());
  } catch (const Error& e) {
    return error_message(protocol_error_code(e.code()), e.what());
  }
}

std::string protocol_error_code(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidAction";
    case Errc::Domain: return "EpisodeDone";
    default: return errc_name(code);
  }
}

nlohmann::json error_message(const std::string& code, const std::string& detail) {
  return {{"type", "error"}, {"code", code}, {"detail", detail}};
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) fail(Errc::InvalidArgument, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(text.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) fail(Errc::InvalidArgument, "invalid base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the zero bytes that padding stands for.
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

}  // namespace hideseek::service
