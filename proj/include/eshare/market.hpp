#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eshare/network.hpp"

namespace eshare {

/// Production/consumption baseline; must satisfy p0 + E0 = D0.
struct Baseline {
  double p0 = 0.0;
  double E0 = 0.0;
  double D0 = 0.0;
};

/// Disutility J(p) = c p^2 + d p of adjusting production by p. D is the
/// required reduction of purchased energy.
struct Prosumer {
  double c = 1.0;
  double d = 0.0;
  double D = 0.0;
  std::optional<Baseline> baseline;
};

/// One prosumer per bus, in bus order.
struct Scenario {
  NetworkModel network;
  std::vector<Prosumer> prosumers;
  double a = 1.0;
  std::string label;
  std::string units;

  int size() const noexcept { return static_cast<int>(prosumers.size()); }
  Eigen::VectorXd c() const;
  Eigen::VectorXd d() const;
  Eigen::VectorXd D() const;
};

/// Throws Error{InvalidScenario} or Error{TooFewProsumers}.
void validate_scenario(const Scenario& scenario);

Scenario make_scenario(NetworkModel network, std::vector<Prosumer> prosumers, double a,
                       std::string label = {}, std::string units = {});

struct ClearingOutcome {
  Eigen::VectorXd lambda;
  Eigen::VectorXd q;  // withdrawals, q = -a lambda + b
  double eta = 0.0;
  Eigen::VectorXd alpha_lower;
  Eigen::VectorXd alpha_upper;
  Eigen::VectorXd flows;
  double qp_residual = 0.0;
};

/// Prices minimizing sum(lambda^2) subject to power balance and line limits
/// for the demand functions q_i = -a lambda_i + b_i. Duals satisfy
///   2 lambda_i + a eta + a sum_l pi_il (alpha_lower_l - alpha_upper_l) = 0.
/// Throws Error{MarketInfeasible}.
ClearingOutcome clear_market(const Scenario& scenario, const Eigen::VectorXd& b);

/// Same clearing solved in the quantity variables: min sum (q - b)^2.
Eigen::VectorXd clear_quantities(const Scenario& scenario, const Eigen::VectorXd& b);

/// Residual of the clearing optimality system (stationarity above, demand
/// functions, balance, flow limits, dual signs, complementarity), scaled by
/// 1 + max(|b|_inf, largest finite limit).
double clearing_kkt_residual(const Scenario& scenario, const Eigen::VectorXd& b,
                             const ClearingOutcome& outcome);

enum class CostMode { Unregulated, Regulated };

double disutility(const Prosumer& prosumer, double p);
Eigen::VectorXd disutilities(const Scenario& scenario, const Eigen::VectorXd& p);

/// 2 c_i p_i + d_i - q_i / (a (I - 1)).
double marginal_bound(const Scenario& scenario, int i, double p_i, double q_i);

/// Regulated prices: the larger of lambda_i and the marginal bound for
/// buyers (q_i >= 0), the smaller for sellers.
Eigen::VectorXd regulated_price(const Scenario& scenario, const ClearingOutcome& clearing,
                                const Eigen::VectorXd& p);

/// max{lambda_i q_i, (2 c_i p_i + d_i - q_i/(a(I-1))) q_i}.
double payment(const Scenario& scenario, const ClearingOutcome& clearing, double p_i, int i);
double payment(const Scenario& scenario, const Eigen::VectorXd& b, double p_i, int i);

/// Cost of prosumer i at the cleared outcome, with p_i = D_i - q_i:
/// J_i(p_i) + lambda_i q_i (unregulated) or J_i(p_i) + u_i (regulated).
double prosumer_cost(const Scenario& scenario, const ClearingOutcome& clearing, int i,
                     CostMode mode);
double prosumer_cost(const Scenario& scenario, const Eigen::VectorXd& b, int i, CostMode mode);

}  // namespace eshare
