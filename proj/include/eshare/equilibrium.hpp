#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eshare/market.hpp"

namespace eshare {

/// Minimizer of sum_i J_i(p_i) + w/2 sum_i (D_i - p_i)^2 under power balance
/// sum p = sum D and the line limits on the flows of D - p. Duals follow
///   dJ_i/dp_i - w (D_i - p_i) + kappa + sum_l pi_il (tau_lower_l - tau_upper_l) = 0.
struct CentralSolution {
  Eigen::VectorXd p;
  double kappa = 0.0;
  Eigen::VectorXd tau_lower;
  Eigen::VectorXd tau_upper;
  double kkt_residual = 0.0;
};

struct SocialOptimum {
  Eigen::VectorXd p_tilde;
  double kappa = 0.0;
  Eigen::VectorXd tau_lower;
  Eigen::VectorXd tau_upper;
  Eigen::VectorXd costs;
  double total_cost = 0.0;
  double kkt_residual = 0.0;
};

struct EquilibriumResult {
  Eigen::VectorXd p_bar;
  Eigen::VectorXd b_bar;
  Eigen::VectorXd lambda_r;
  Eigen::VectorXd q_bar;
  double kappa = 0.0;
  Eigen::VectorXd tau_lower;
  Eigen::VectorXd tau_upper;
  Eigen::VectorXd costs;  // regulated costs at the equilibrium
  double total_disutility = 0.0;
  double net_payment = 0.0;
  double kkt_residual = 0.0;
  // max |lambda(b_bar) - lambda_r| and max |q(b_bar) - (D - p_bar)| after re-clearing.
  double price_consistency = 0.0;
  double quantity_consistency = 0.0;
};

struct VariationalEquilibrium {
  Eigen::VectorXd p_bar;
  Eigen::VectorXd b_bar;
  Eigen::VectorXd lambda_bar;
  std::vector<std::string> warnings;
};

struct PriceTakingEquilibrium {
  Eigen::VectorXd p_tilde;
  Eigen::VectorXd lambda_tilde;
  Eigen::VectorXd b_tilde;
  // max |lambda_tilde_i - (2 c_i p_i + d_i)|
  double marginal_residual = 0.0;
};

struct SelfSufficiency {
  Eigen::VectorXd costs;
  double total = 0.0;
};

struct PoaReport {
  double poa = 1.0;
  std::optional<double> upper_bound;
  double C1 = 0.0;
  double C2 = 0.0;
  double J_bar = 0.0;
  double J_tilde = 0.0;
};

struct NetPayment {
  double payment = 0.0;
  double congestion_rent = 0.0;  // sum_l F_l (tau_lower_l + tau_upper_l)
};

/// Throws Error{Infeasible}.
CentralSolution solve_central(const Scenario& scenario, double weight);

SocialOptimum social_optimum(const Scenario& scenario);

/// weight = 1 / (a (I - 1)). Throws Error{TooFewProsumers, Infeasible}.
CentralSolution central_solution(const Scenario& scenario);

/// Unique equilibrium of the regulated game:
///   lambda_r_i = 2 c_i p_i + d_i - (D_i - p_i)/(a(I-1)),  b_i = D_i - p_i + a lambda_r_i.
EquilibriumResult improved_gne(const Scenario& scenario);

/// lambda_i = 2 c_i p_i + d_i + (D_i - p_i)/a, b_i = a lambda_i + D_i - p_i.
/// Warns when the network is meshed.
VariationalEquilibrium variational_equilibrium(const Scenario& scenario);

PriceTakingEquilibrium price_taking_equilibrium(const Scenario& scenario);

SelfSufficiency self_sufficiency(const Scenario& scenario);

/// Throws Error{DegenerateBaseline} when J(p_tilde) <= 0. upper_bound is empty
/// when C2 <= 0.
PoaReport poa(const Scenario& scenario);

/// max_i |lambda_r_i - (-kappa - sum_l pi_il tau_lower_l + sum_l pi_il tau_upper_l)|.
double price_structure_residual(const Scenario& scenario, const EquilibriumResult& eqm);

NetPayment net_payment(const Scenario& scenario, const EquilibriumResult& eqm);

/// Element i is true iff the regulated cost does not exceed J_i(D_i) + tol.
std::vector<bool> pareto_check(const Scenario& scenario, const EquilibriumResult& eqm,
                               double tol = 1e-8);

}  // namespace eshare
