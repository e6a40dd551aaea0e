#include "eshare/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "eshare/error.hpp"
#include "eshare/qp.hpp"

namespace eshare {

CentralSolution solve_central(const Scenario& s, double weight) {
  const int n = s.size();
  const Eigen::VectorXd c = s.c();
  const Eigen::VectorXd D = s.D();
  const Eigen::MatrixXd& pi = s.network.ptdf();
  const int lines = s.network.line_count();

  QuadraticProgram qp;
  qp.hessian = (2.0 * c.array() + weight).matrix().asDiagonal();
  qp.linear = s.d() - weight * D;
  qp.eq_matrix = Eigen::MatrixXd::Constant(1, n, -1.0);
  qp.eq_rhs = Eigen::VectorXd::Constant(1, -D.sum());
  // Flows of the withdrawals D - p.
  qp.ineq_matrix = -pi.transpose();
  qp.ineq_lower.resize(lines);
  qp.ineq_upper.resize(lines);
  const Eigen::VectorXd base = pi.transpose() * D;
  for (int l = 0; l < lines; ++l) {
    const double f = s.network.lines()[l].limit;
    qp.ineq_lower(l) = -f - base(l);
    qp.ineq_upper(l) = f - base(l);
  }

  const QpSolution sol = solve_qp(qp);
  CentralSolution out;
  out.p = sol.x;
  out.kappa = sol.eq_duals(0);
  out.tau_lower = sol.ineq_duals_lower;
  out.tau_upper = sol.ineq_duals_upper;
  out.kkt_residual = sol.kkt_residual;
  return out;
}

SocialOptimum social_optimum(const Scenario& s) {
  const CentralSolution cs = solve_central(s, 0.0);
  SocialOptimum out;
  out.p_tilde = cs.p;
  out.kappa = cs.kappa;
  out.tau_lower = cs.tau_lower;
  out.tau_upper = cs.tau_upper;
  out.costs = disutilities(s, cs.p);
  out.total_cost = out.costs.sum();
  out.kkt_residual = cs.kkt_residual;
  return out;
}

CentralSolution central_solution(const Scenario& s) {
  if (s.size() < 2) throw Error(Errc::TooFewProsumers, "at least two prosumers are required");
  return solve_central(s, 1.0 / (s.a * (s.size() - 1)));
}

EquilibriumResult improved_gne(const Scenario& s) {
  const CentralSolution cs = central_solution(s);
  const int n = s.size();
  const Eigen::VectorXd D = s.D();
  const double w = 1.0 / (s.a * (n - 1));

  EquilibriumResult out;
  out.p_bar = cs.p;
  out.q_bar = D - cs.p;
  out.lambda_r = (2.0 * s.c().cwiseProduct(cs.p) + s.d() - w * out.q_bar);
  out.b_bar = out.q_bar + s.a * out.lambda_r;
  out.kappa = cs.kappa;
  out.tau_lower = cs.tau_lower;
  out.tau_upper = cs.tau_upper;
  out.kkt_residual = cs.kkt_residual;

  const ClearingOutcome clearing = clear_market(s, out.b_bar);
  out.price_consistency = (clearing.lambda - out.lambda_r).cwiseAbs().maxCoeff();
  out.quantity_consistency = (clearing.q - out.q_bar).cwiseAbs().maxCoeff();

  out.costs.resize(n);
  for (int i = 0; i < n; ++i) out.costs(i) = prosumer_cost(s, clearing, i, CostMode::Regulated);
  out.total_disutility = disutilities(s, out.p_bar).sum();
  out.net_payment = out.lambda_r.dot(out.q_bar);
  return out;
}

VariationalEquilibrium variational_equilibrium(const Scenario& s) {
  VariationalEquilibrium out;
  if (!is_radial(s.network)) {
    out.warnings.push_back("network is meshed; the closed-form variational equilibrium assumes a radial network");
  }
  const CentralSolution cs = central_solution(s);
  const Eigen::VectorXd q = s.D() - cs.p;
  out.p_bar = cs.p;
  out.lambda_bar = 2.0 * s.c().cwiseProduct(cs.p) + s.d() + q / s.a;
  out.b_bar = s.a * out.lambda_bar + q;
  return out;
}

PriceTakingEquilibrium price_taking_equilibrium(const Scenario& s) {
  const SocialOptimum so = social_optimum(s);
  PriceTakingEquilibrium out;
  out.p_tilde = so.p_tilde;
  out.lambda_tilde = Eigen::VectorXd::Constant(s.size(), -so.kappa) -
                     s.network.ptdf() * (so.tau_lower - so.tau_upper);
  out.b_tilde = s.D() - so.p_tilde + s.a * out.lambda_tilde;
  const Eigen::VectorXd marginal = 2.0 * s.c().cwiseProduct(so.p_tilde) + s.d();
  out.marginal_residual = (out.lambda_tilde - marginal).cwiseAbs().maxCoeff();
  return out;
}

SelfSufficiency self_sufficiency(const Scenario& s) {
  SelfSufficiency out;
  out.costs = disutilities(s, s.D());
  out.total = out.costs.sum();
  return out;
}

PoaReport poa(const Scenario& s) {
  const SocialOptimum so = social_optimum(s);
  const CentralSolution cs = central_solution(s);
  const Eigen::VectorXd D = s.D();

  PoaReport out;
  out.J_tilde = so.total_cost;
  out.J_bar = disutilities(s, cs.p).sum();
  if (!(out.J_tilde > 0.0)) {
    throw Error(Errc::DegenerateBaseline, "social optimum has nonpositive total disutility");
  }
  out.poa = out.J_bar / out.J_tilde;
  out.C1 = std::max((D - cs.p).cwiseAbs2().maxCoeff(), (D - so.p_tilde).cwiseAbs2().maxCoeff());
  out.C2 = so.costs.minCoeff();
  if (out.C2 > 0.0) out.upper_bound = 1.0 + out.C1 / (2.0 * s.a * (s.size() - 1) * out.C2);
  return out;
}

double price_structure_residual(const Scenario& s, const EquilibriumResult& eqm) {
  const Eigen::VectorXd structured = Eigen::VectorXd::Constant(s.size(), -eqm.kappa) -
                                     s.network.ptdf() * (eqm.tau_lower - eqm.tau_upper);
  return (eqm.lambda_r - structured).cwiseAbs().maxCoeff();
}

NetPayment net_payment(const Scenario& s, const EquilibriumResult& eqm) {
  NetPayment out;
  out.payment = eqm.lambda_r.dot(eqm.q_bar);
  for (int l = 0; l < s.network.line_count(); ++l) {
    const double tau = eqm.tau_lower(l) + eqm.tau_upper(l);
    if (tau != 0.0) out.congestion_rent += s.network.lines()[l].limit * tau;
  }
  return out;
}

std::vector<bool> pareto_check(const Scenario& s, const EquilibriumResult& eqm, double tol) {
  const SelfSufficiency ss = self_sufficiency(s);
  std::vector<bool> out(s.size());
  for (int i = 0; i < s.size(); ++i) out[i] = eqm.costs(i) <= ss.costs(i) + tol;
  return out;
}

}  // namespace eshare
