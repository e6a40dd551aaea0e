#include "eshare/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eshare/error.hpp"
#include "eshare/qp.hpp"

namespace eshare {

namespace {

void check_length(const Scenario& s, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != s.size()) {
    throw Error(Errc::DimensionMismatch, std::string(what) + " has length " + std::to_string(v.size()) +
                                             ", expected " + std::to_string(s.size()));
  }
}

double finite_limit_scale(const Scenario& s) {
  double m = 0.0;
  for (const auto& line : s.network.lines()) {
    if (std::isfinite(line.limit)) m = std::max(m, line.limit);
  }
  return m;
}

// Flow rows expressed in the decision variable x, where flows = Pi^T (coef x + offset).
void add_flow_rows(const Scenario& s, double coef, const Eigen::VectorXd& offset,
                   QuadraticProgram& qp) {
  const Eigen::MatrixXd& pi = s.network.ptdf();
  const int lines = s.network.line_count();
  qp.ineq_matrix = coef * pi.transpose();
  qp.ineq_lower.resize(lines);
  qp.ineq_upper.resize(lines);
  const Eigen::VectorXd base = pi.transpose() * offset;
  for (int l = 0; l < lines; ++l) {
    const double f = s.network.lines()[l].limit;
    qp.ineq_lower(l) = -f - base(l);
    qp.ineq_upper(l) = f - base(l);
  }
}

QpSolution solve_clearing(const QuadraticProgram& qp) {
  try {
    return solve_qp(qp);
  } catch (const Error& e) {
    if (e.code() == Errc::Infeasible) {
      throw Error(Errc::MarketInfeasible, "no balanced clearing satisfies the line limits");
    }
    throw;
  }
}

}  // namespace

Eigen::VectorXd Scenario::c() const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out(i) = prosumers[i].c;
  return out;
}

Eigen::VectorXd Scenario::d() const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out(i) = prosumers[i].d;
  return out;
}

Eigen::VectorXd Scenario::D() const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out(i) = prosumers[i].D;
  return out;
}

void validate_scenario(const Scenario& s) {
  if (s.size() != s.network.bus_count()) {
    throw Error(Errc::InvalidScenario, std::to_string(s.size()) + " prosumers for " +
                                           std::to_string(s.network.bus_count()) + " buses");
  }
  if (s.size() < 2) throw Error(Errc::TooFewProsumers, "at least two prosumers are required");
  if (!(s.a > 0.0) || !std::isfinite(s.a)) {
    throw Error(Errc::InvalidScenario, "market sensitivity a must be positive");
  }
  for (int i = 0; i < s.size(); ++i) {
    const Prosumer& pr = s.prosumers[i];
    const std::string who = "prosumer " + std::to_string(i + 1);
    if (!(pr.c > 0.0) || !std::isfinite(pr.c)) throw Error(Errc::InvalidScenario, who + ": c must be positive");
    if (!std::isfinite(pr.d) || !std::isfinite(pr.D)) throw Error(Errc::InvalidScenario, who + ": d and D must be finite");
    if (pr.baseline) {
      const Baseline& bl = *pr.baseline;
      if (std::abs(bl.p0 + bl.E0 - bl.D0) > 1e-9 * (1.0 + std::abs(bl.D0))) {
        throw Error(Errc::InvalidScenario, who + ": baseline violates p0 + E0 = D0");
      }
    }
  }
}

Scenario make_scenario(NetworkModel network, std::vector<Prosumer> prosumers, double a,
                       std::string label, std::string units) {
  Scenario s{std::move(network), std::move(prosumers), a, std::move(label), std::move(units)};
  validate_scenario(s);
  return s;
}

ClearingOutcome clear_market(const Scenario& s, const Eigen::VectorXd& b) {
  check_length(s, b, "bid vector");
  const int n = s.size();
  QuadraticProgram qp;
  qp.hessian = 2.0 * Eigen::MatrixXd::Identity(n, n);
  qp.linear = Eigen::VectorXd::Zero(n);
  qp.eq_matrix = Eigen::MatrixXd::Constant(1, n, -s.a);
  qp.eq_rhs = Eigen::VectorXd::Constant(1, -b.sum());
  add_flow_rows(s, -s.a, b, qp);

  const QpSolution sol = solve_clearing(qp);
  ClearingOutcome out;
  out.lambda = sol.x;
  out.q = b - s.a * sol.x;
  out.eta = sol.eq_duals(0);
  out.alpha_lower = sol.ineq_duals_lower;
  out.alpha_upper = sol.ineq_duals_upper;
  out.flows = line_flows(s.network, out.q);
  out.qp_residual = sol.kkt_residual;
  return out;
}

Eigen::VectorXd clear_quantities(const Scenario& s, const Eigen::VectorXd& b) {
  check_length(s, b, "bid vector");
  const int n = s.size();
  QuadraticProgram qp;
  qp.hessian = 2.0 * Eigen::MatrixXd::Identity(n, n);
  qp.linear = -2.0 * b;
  qp.eq_matrix = Eigen::MatrixXd::Ones(1, n);
  qp.eq_rhs = Eigen::VectorXd::Zero(1);
  add_flow_rows(s, 1.0, Eigen::VectorXd::Zero(n), qp);
  return solve_clearing(qp).x;
}

double clearing_kkt_residual(const Scenario& s, const Eigen::VectorXd& b, const ClearingOutcome& o) {
  check_length(s, b, "bid vector");
  const Eigen::MatrixXd& pi = s.network.ptdf();
  const double scale = 1.0 + std::max(b.cwiseAbs().maxCoeff(), finite_limit_scale(s));

  const Eigen::VectorXd stationarity =
      2.0 * o.lambda + Eigen::VectorXd::Constant(s.size(), s.a * o.eta) +
      s.a * pi * (o.alpha_lower - o.alpha_upper);
  double r = stationarity.cwiseAbs().maxCoeff();
  r = std::max(r, (o.q - (b - s.a * o.lambda)).cwiseAbs().maxCoeff());
  r = std::max(r, std::abs(o.q.sum()));

  const Eigen::VectorXd flows = line_flows(s.network, o.q);
  for (int l = 0; l < s.network.line_count(); ++l) {
    const double f = s.network.lines()[l].limit;
    const double al = o.alpha_lower(l);
    const double au = o.alpha_upper(l);
    r = std::max({r, -al, -au});
    if (std::isfinite(f)) {
      r = std::max(r, std::abs(flows(l)) - f);
      r = std::max({r, std::abs(al * (flows(l) + f)), std::abs(au * (f - flows(l)))});
    } else {
      r = std::max({r, std::abs(al), std::abs(au)});
    }
  }
  return r / scale;
}

double disutility(const Prosumer& pr, double p) { return pr.c * p * p + pr.d * p; }

Eigen::VectorXd disutilities(const Scenario& s, const Eigen::VectorXd& p) {
  check_length(s, p, "production vector");
  Eigen::VectorXd out(s.size());
  for (int i = 0; i < s.size(); ++i) out(i) = disutility(s.prosumers[i], p(i));
  return out;
}

double marginal_bound(const Scenario& s, int i, double p_i, double q_i) {
  const Prosumer& pr = s.prosumers[i];
  return 2.0 * pr.c * p_i + pr.d - q_i / (s.a * (s.size() - 1));
}

Eigen::VectorXd regulated_price(const Scenario& s, const ClearingOutcome& clearing,
                                const Eigen::VectorXd& p) {
  check_length(s, p, "production vector");
  Eigen::VectorXd out(s.size());
  for (int i = 0; i < s.size(); ++i) {
    const double q = clearing.q(i);
    const double bound = marginal_bound(s, i, p(i), q);
    out(i) = q >= 0.0 ? std::max(clearing.lambda(i), bound) : std::min(clearing.lambda(i), bound);
  }
  return out;
}

double payment(const Scenario& s, const ClearingOutcome& clearing, double p_i, int i) {
  const double q = clearing.q(i);
  return std::max(clearing.lambda(i) * q, marginal_bound(s, i, p_i, q) * q);
}

double payment(const Scenario& s, const Eigen::VectorXd& b, double p_i, int i) {
  return payment(s, clear_market(s, b), p_i, i);
}

double prosumer_cost(const Scenario& s, const ClearingOutcome& clearing, int i, CostMode mode) {
  const double q = clearing.q(i);
  const double p = s.prosumers[i].D - q;
  const double pay = mode == CostMode::Regulated ? payment(s, clearing, p, i) : clearing.lambda(i) * q;
  return disutility(s.prosumers[i], p) + pay;
}

double prosumer_cost(const Scenario& s, const Eigen::VectorXd& b, int i, CostMode mode) {
  return prosumer_cost(s, clear_market(s, b), i, mode);
}

}  // namespace eshare
