#pragma once

#include <vector>

#include <Eigen/Dense>

namespace eshare {

/// Strictly convex quadratic program
///
///   min  1/2 x^T H x + g^T x
///   s.t. A_eq x = b_eq
///        l <= A_in x <= u        (entries of l, u may be -inf / +inf)
///
/// Multiplier convention: at the optimum
///
///   H x + g = A_eq^T y + A_in^T (mu_lower - mu_upper),   mu_lower, mu_upper >= 0
///
/// i.e. the Lagrangian is f - y^T(A_eq x - b_eq) - mu_lower^T(A_in x - l)
/// - mu_upper^T(u - A_in x).
struct QuadraticProgram {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_lower;
  Eigen::VectorXd ineq_upper;

  int variables() const noexcept { return static_cast<int>(linear.size()); }
  int equalities() const noexcept { return static_cast<int>(eq_rhs.size()); }
  int inequalities() const noexcept { return static_cast<int>(ineq_lower.size()); }
};

enum class Bound { Lower, Upper };

struct ActiveBound {
  int row;
  Bound side;
};

struct KktReport {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = 0.0;

  double max() const noexcept;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals_lower;
  Eigen::VectorXd ineq_duals_upper;
  std::vector<ActiveBound> active_set;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct QpOptions {
  // Feasibility tolerance relative to 1 + max |rhs|.
  double feasibility_tol = 1e-10;
  // 0 selects the default cap of 50 * (n + m_in).
  int max_iterations = 0;
};

/// Solves the program with a dual active-set method (Goldfarb-Idnani) on a
/// Cholesky factor of H. Ties between blocking or violated constraints go to
/// the lowest index. Duals at degenerate optima are not unique; the returned
/// multipliers are the ones the active set produces.
///
/// Throws Error{NotPositiveDefinite, Infeasible, IterationLimit,
/// DimensionMismatch}.
QpSolution solve_qp(const QuadraticProgram& qp, const QpOptions& options = {});

/// Scaled KKT violations: stationarity relative to 1 + |g|_inf, feasibility and
/// complementarity relative to 1 + max finite |rhs|.
KktReport kkt_residual(const QuadraticProgram& qp, const QpSolution& solution);

}  // namespace eshare
