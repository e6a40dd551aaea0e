#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eshare {

enum class Errc {
  DisconnectedGraph,
  NonpositiveWeight,
  SingularLaplacian,
  DimensionMismatch,
  UnbalancedInjection,
  InvalidArgument,
  Infeasible,
  NotPositiveDefinite,
  IterationLimit,
  MarketInfeasible,
  TooFewProsumers,
  DegenerateBaseline,
  ScanIntervalEmpty,
  WrongTopology,
  InvalidScenario,
  FileError,
  UsageError,
};

std::string_view to_string(Errc code) noexcept;

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace eshare
