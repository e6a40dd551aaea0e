#include "eshare/bidding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "eshare/error.hpp"
#include "eshare/qp.hpp"

namespace eshare {

Eigen::VectorXd platform_update(const Scenario& s, const Eigen::VectorXd& lambda_k,
                                const Eigen::VectorXd& b_k) {
  const int n = s.size();
  if (lambda_k.size() != n || b_k.size() != n) {
    throw Error(Errc::DimensionMismatch, "price and bid vectors must have one entry per prosumer");
  }
  const Eigen::MatrixXd& pi = s.network.ptdf();
  const int lines = s.network.line_count();

  QuadraticProgram qp;
  qp.hessian = 4.0 * Eigen::MatrixXd::Identity(n, n);
  qp.linear = -2.0 * lambda_k;
  qp.eq_matrix = Eigen::MatrixXd::Constant(1, n, -s.a);
  qp.eq_rhs = Eigen::VectorXd::Constant(1, -b_k.sum());
  qp.ineq_matrix = -s.a * pi.transpose();
  qp.ineq_lower.resize(lines);
  qp.ineq_upper.resize(lines);
  const Eigen::VectorXd base = pi.transpose() * b_k;
  for (int l = 0; l < lines; ++l) {
    const double f = s.network.lines()[l].limit;
    qp.ineq_lower(l) = -f - base(l);
    qp.ineq_upper(l) = f - base(l);
  }
  try {
    return solve_qp(qp).x;
  } catch (const Error& e) {
    if (e.code() == Errc::Infeasible) {
      throw Error(Errc::MarketInfeasible, "no balanced clearing satisfies the line limits");
    }
    throw;
  }
}

ProsumerUpdate prosumer_update(const Scenario& s, const Eigen::VectorXd& lambda) {
  const int n = s.size();
  if (n < 2) throw Error(Errc::TooFewProsumers, "at least two prosumers are required");
  if (lambda.size() != n) throw Error(Errc::DimensionMismatch, "price vector has wrong length");
  const double k = s.a * (n - 1);
  ProsumerUpdate out;
  out.p.resize(n);
  out.b.resize(n);
  for (int i = 0; i < n; ++i) {
    const Prosumer& pr = s.prosumers[i];
    out.p(i) = (k * lambda(i) - k * pr.d + pr.D) / (2.0 * k * pr.c + 1.0);
    out.b(i) = pr.D - out.p(i) + s.a * lambda(i);
  }
  return out;
}

double a_min(const Scenario& s) {
  const int n = s.size();
  if (n < 2) return 0.0;
  const double inv_c = s.c().cwiseInverse().maxCoeff();
  return (n - 2.0) / (2.0 * (n - 1.0)) * inv_c;
}

BiddingResult run_bidding(const Scenario& s, const BiddingConfig& config,
                          const EquilibriumResult* reference) {
  const int n = s.size();
  BiddingResult out;
  out.epsilon = config.epsilon.value_or(1e-6 * (1.0 + s.D().cwiseAbs().maxCoeff()));
  if (!(out.epsilon > 0.0)) throw Error(Errc::InvalidArgument, "epsilon must be positive");
  if (config.max_iter < 1) throw Error(Errc::InvalidArgument, "max_iter must be positive");
  const double threshold = a_min(s);
  if (s.a < threshold) {
    out.warnings.push_back("a = " + std::to_string(s.a) + " is below the convergence threshold " +
                           std::to_string(threshold));
  }

  Eigen::VectorXd b = config.initial_b.value_or(Eigen::VectorXd::Zero(n));
  Eigen::VectorXd lambda = config.initial_lambda.value_or(Eigen::VectorXd::Zero(n));
  Eigen::VectorXd p = s.D();
  if (b.size() != n || lambda.size() != n) {
    throw Error(Errc::DimensionMismatch, "initial point has wrong length");
  }

  for (int k = 1; k <= config.max_iter; ++k) {
    lambda = platform_update(s, lambda, b);
    ProsumerUpdate next = prosumer_update(s, lambda);
    const double delta = (next.b - b).cwiseAbs().maxCoeff();
    b = std::move(next.b);
    p = std::move(next.p);
    out.iterations = k;
    out.final_delta = delta;
    if (config.record_trace) {
      BiddingIterate it{k, lambda, b, p, delta, std::nullopt};
      if (reference) {
        it.dist_to_eqm = std::sqrt((p - reference->p_bar).squaredNorm() + (b - reference->b_bar).squaredNorm());
      }
      out.trace.push_back(std::move(it));
    }
    if (delta <= out.epsilon) {
      out.status = BiddingStatus::Converged;
      break;
    }
  }
  out.lambda = lambda;
  out.b = b;
  out.p = p;
  return out;
}

FejerReport fejer_check(const std::vector<BiddingIterate>& trace, const EquilibriumResult& eqm,
                        double rel_tol) {
  FejerReport out;
  const double scale = 1.0 + std::max(eqm.p_bar.cwiseAbs().maxCoeff(), eqm.b_bar.cwiseAbs().maxCoeff());
  const double floor = 1e-24 * scale * scale;
  for (const auto& it : trace) {
    out.distances.push_back((it.p - eqm.p_bar).squaredNorm() + (it.b - eqm.b_bar).squaredNorm());
  }
  for (std::size_t k = 1; k < out.distances.size(); ++k) {
    const double prev = out.distances[k - 1];
    const double growth = out.distances[k] - prev;
    if (growth > rel_tol * prev + floor) {
      if (out.monotone) out.first_violation = static_cast<int>(k);
      out.monotone = false;
      out.max_increase = std::max(out.max_increase, growth);
    }
  }
  return out;
}

void write_trace_csv(std::ostream& os, const BiddingResult& result) {
  os << "iter,i,lambda,b,p,delta_b_norm,dist_to_eqm\n";
  os.precision(17);
  for (const auto& it : result.trace) {
    for (Eigen::Index i = 0; i < it.b.size(); ++i) {
      os << it.iter << ',' << i + 1 << ',' << it.lambda(i) << ',' << it.b(i) << ',' << it.p(i) << ','
         << it.delta_b_norm << ',';
      if (it.dist_to_eqm) os << *it.dist_to_eqm;
      os << '\n';
    }
  }
}

}  // namespace eshare
