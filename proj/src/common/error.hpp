#pragma once

#include <stdexcept>
#include <string>

namespace hideseek {

// Mirrors the status codes exported through the C API.
enum class Errc {
  InvalidArgument = 1,
  InvalidScenario = 2,
  Io = 3,
  FormatVersionMismatch = 4,
  NoPath = 5,
  ShapeMismatch = 6,
  NonFiniteValue = 7,
  EmptyDataset = 8,
  MalformedObservation = 9,
  PlanTooShort = 10,
  NoValidGoal = 11,
  EmptyBank = 12,
  SessionActive = 13,
  Bind = 14,
  LatticeMismatch = 15,
  Domain = 16,
  NoCachedForward = 17,
  NonSquareRaster = 18,
  SingleClassDataset = 19,
  Internal = 99,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace hideseek
