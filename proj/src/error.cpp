#include "eshare/error.hpp"

namespace eshare {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DisconnectedGraph: return "DisconnectedGraph";
    case Errc::NonpositiveWeight: return "NonpositiveWeight";
    case Errc::SingularLaplacian: return "SingularLaplacian";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnbalancedInjection: return "UnbalancedInjection";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Infeasible: return "Infeasible";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::IterationLimit: return "IterationLimit";
    case Errc::MarketInfeasible: return "MarketInfeasible";
    case Errc::TooFewProsumers: return "TooFewProsumers";
    case Errc::DegenerateBaseline: return "DegenerateBaseline";
    case Errc::ScanIntervalEmpty: return "ScanIntervalEmpty";
    case Errc::WrongTopology: return "WrongTopology";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::FileError: return "FileError";
    case Errc::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace eshare
