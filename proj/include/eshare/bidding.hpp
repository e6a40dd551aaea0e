#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eshare/equilibrium.hpp"
#include "eshare/market.hpp"

namespace eshare {

struct BiddingConfig {
  // Stop when |b^{k+1} - b^k|_inf <= epsilon. Default 1e-6 (1 + |D|_inf).
  std::optional<double> epsilon;
  int max_iter = 1000;
  bool record_trace = true;
  // Starting point; zero when absent.
  std::optional<Eigen::VectorXd> initial_b;
  std::optional<Eigen::VectorXd> initial_lambda;
};

enum class BiddingStatus { Converged, MaxIterExceeded };

struct BiddingIterate {
  int iter = 0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd b;
  Eigen::VectorXd p;
  double delta_b_norm = 0.0;
  std::optional<double> dist_to_eqm;  // |(p - p_bar, b - b_bar)|_2
};

struct BiddingResult {
  BiddingStatus status = BiddingStatus::MaxIterExceeded;
  int iterations = 0;
  double epsilon = 0.0;
  double final_delta = 0.0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd b;
  Eigen::VectorXd p;
  std::vector<BiddingIterate> trace;
  std::vector<std::string> warnings;
};

struct ProsumerUpdate {
  Eigen::VectorXd p;
  Eigen::VectorXd b;
};

/// argmin sum lambda_i^2 + sum (lambda_i - lambda_k_i)^2 over the clearing
/// constraints at bids b_k. Throws Error{MarketInfeasible}.
Eigen::VectorXd platform_update(const Scenario& scenario, const Eigen::VectorXd& lambda_k,
                                const Eigen::VectorXd& b_k);

/// p_i = (a(I-1) lambda_i - a(I-1) d_i + D_i) / (2 a (I-1) c_i + 1),
/// b_i = D_i - p_i + a lambda_i. Throws Error{TooFewProsumers}.
ProsumerUpdate prosumer_update(const Scenario& scenario, const Eigen::VectorXd& lambda);

/// (I - 2) / (2 (I - 1)) max_i 1/c_i.
double a_min(const Scenario& scenario);

/// Iterates platform and prosumer updates from b = lambda = 0 (or the given
/// start). Never throws on non-convergence; see status. When reference is
/// given, each iterate records its distance to it.
BiddingResult run_bidding(const Scenario& scenario, const BiddingConfig& config = {},
                          const EquilibriumResult* reference = nullptr);

struct FejerReport {
  bool monotone = true;
  int first_violation = -1;  // trace index where the squared distance grew
  double max_increase = 0.0;
  std::vector<double> distances;  // squared distances
};

/// Checks |(p^k - p_bar, b^k - b_bar)|^2 is non-increasing along the trace,
/// allowing a relative slack of rel_tol.
FejerReport fejer_check(const std::vector<BiddingIterate>& trace, const EquilibriumResult& eqm,
                        double rel_tol = 1e-10);

/// Columns iter,i,lambda,b,p,delta_b_norm,dist_to_eqm.
void write_trace_csv(std::ostream& os, const BiddingResult& result);

}  // namespace eshare
