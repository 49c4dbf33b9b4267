#include "common/error.hpp"

namespace hideseek {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::Io: return "IoError";
    case Errc::FormatVersionMismatch: return "FormatVersionMismatch";
    case Errc::NoPath: return "NoPath";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::MalformedObservation: return "MalformedObservation";
    case Errc::PlanTooShort: return "PlanTooShort";
    case Errc::NoValidGoal: return "NoValidGoal";
    case Errc::EmptyBank: return "EmptyBank";
    case Errc::SessionActive: return "SessionActive";
    case Errc::Bind: return "BindError";
    case Errc::LatticeMismatch: return "LatticeMismatch";
    case Errc::Domain: return "DomainError";
    case Errc::NoCachedForward: return "NoCachedForward";
    case Errc::NonSquareRaster: return "NonSquareRaster";
    case Errc::SingleClassDataset: return "SingleClassDataset";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace hideseek
