#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eshare/market.hpp"

namespace eshare {

struct ScanConfig {
  // Bid interval to scan; sized automatically when absent.
  std::optional<std::pair<double, double>> interval;
  int coarse_points = 2001;
  int refine_rounds = 3;
  int refine_factor = 10;
  double distinct_spacing = 1e-5;
  CostMode mode = CostMode::Unregulated;
};

struct ScanPoint {
  double b = 0.0;
  double gamma = 0.0;
};

struct BestResponseScan {
  int prosumer = 0;
  Eigen::VectorXd bids;  // full profile; entry `prosumer` is the current bid
  double lo = 0.0;
  double hi = 0.0;
  std::vector<ScanPoint> samples;  // coarse grid
  std::vector<ScanPoint> minima;   // refined local minima, ascending in b
  double argmin = 0.0;
  double min_value = 0.0;
  double current_value = 0.0;
};

/// Cost of prosumer i as a function of its own bid with the others fixed.
/// Throws Error{ScanIntervalEmpty}.
BestResponseScan best_response(const Scenario& scenario, int i, const Eigen::VectorXd& bids,
                               const ScanConfig& config = {});

std::pair<double, double> auto_scan_interval(const Scenario& scenario, int i,
                                             const Eigen::VectorXd& bids);

struct GneVerification {
  bool is_gne = true;
  Eigen::VectorXd gaps;  // current cost minus best scanned cost, clipped at 0
  Eigen::VectorXd current_cost;
  Eigen::VectorXd best_cost;
  Eigen::VectorXd best_bid;
};

GneVerification verify_gne(const Scenario& scenario, const Eigen::VectorXd& bids, double tol = 1e-6,
                           const ScanConfig& config = {});

enum class GneRegime { Unique, MultipleUpper, MultipleLower };

struct TwoBusPoint {
  Eigen::Vector2d b;
  Eigen::Vector2d lambda;
  Eigen::Vector2d p;
};

/// Two identical prosumers (a = 1, d = 0, cost coefficient c) joined by one
/// line with limit F.
struct GneClassification2Bus {
  GneRegime regime = GneRegime::Unique;
  double c = 0.0;
  double D1 = 0.0;
  double D2 = 0.0;
  double F = 0.0;
  // Multiple regimes: b2 ranges over [b2_lo, b2_hi] and b1 = b2 + b1_offset.
  double b2_lo = 0.0;
  double b2_hi = 0.0;
  double b1_offset = 0.0;
  // Unique regime: the equilibrium. Multiple regimes: the interval midpoint.
  TwoBusPoint point;

  /// Equilibrium of a multiple regime with the given b2.
  TwoBusPoint at(double b2) const;
};

GneClassification2Bus classify_gne_2bus(double c, double D1, double D2, double F);

Scenario two_bus_scenario(double c, double D1, double D2, double F);

/// Path 1-2-3 with unit weights, a = 1, d = 0, limit F on line 1-2 only.
Scenario three_bus_scenario(double c, const Eigen::Vector3d& D, double F);

enum class BrStatus { FixedPoint, Cycling, MaxIterExceeded };

struct BrIteration {
  BrStatus status = BrStatus::MaxIterExceeded;
  std::vector<Eigen::VectorXd> trajectory;  // profile after each sweep, starting with b0
  int sweeps = 0;
  std::optional<GneVerification> verification;
};

/// Gauss-Seidel best-response sweeps from b0.
BrIteration br_iteration(const Scenario& scenario, const Eigen::VectorXd& b0, int max_sweeps,
                         double tol = 1e-6, const ScanConfig& config = {});

enum class Example2Region { Middle, Lower, Upper };

struct Example2Prices {
  Example2Region region = Example2Region::Middle;
  Eigen::Vector3d lambda;
};

/// Closed-form clearing prices for three buses where bus 1 is a leaf whose
/// only line carries the single finite limit, a = 1. Throws
/// Error{WrongTopology}.
Example2Prices example2_region(const Scenario& scenario, const Eigen::VectorXd& bids);

/// Columns b,gamma.
void write_scan_csv(std::ostream& os, const BestResponseScan& scan);

}  // namespace eshare
