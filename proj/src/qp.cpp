#include "eshare/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eshare/error.hpp"

namespace eshare {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative size below which a step direction counts as zero (new normal
// linearly dependent on the active normals).
constexpr double kDependentTol = 1e-10;

// One-sided constraint n^T x >= b (or = b).
struct Constraint {
  Eigen::VectorXd normal;
  double rhs = 0.0;
  bool equality = false;
  // Where the constraint came from; row < 0 means A_eq row (-row - 1).
  int row = 0;
  Bound side = Bound::Lower;
};

void check_dimensions(const QuadraticProgram& qp) {
  const auto n = qp.linear.size();
  auto fail = [](const std::string& what) { throw Error(Errc::DimensionMismatch, what); };
  if (qp.hessian.rows() != n || qp.hessian.cols() != n) fail("hessian must be n x n");
  if (qp.eq_matrix.rows() != qp.eq_rhs.size()) fail("eq_matrix rows != eq_rhs length");
  if (qp.eq_rhs.size() > 0 && qp.eq_matrix.cols() != n) fail("eq_matrix must have n columns");
  if (qp.ineq_matrix.rows() != qp.ineq_lower.size() ||
      qp.ineq_lower.size() != qp.ineq_upper.size()) {
    fail("inequality matrix and bounds disagree in length");
  }
  if (qp.ineq_lower.size() > 0 && qp.ineq_matrix.cols() != n) fail("ineq_matrix must have n columns");
}

double rhs_scale(const QuadraticProgram& qp) {
  double scale = 0.0;
  for (Eigen::Index i = 0; i < qp.eq_rhs.size(); ++i) scale = std::max(scale, std::abs(qp.eq_rhs(i)));
  for (Eigen::Index i = 0; i < qp.ineq_lower.size(); ++i) {
    if (std::isfinite(qp.ineq_lower(i))) scale = std::max(scale, std::abs(qp.ineq_lower(i)));
    if (std::isfinite(qp.ineq_upper(i))) scale = std::max(scale, std::abs(qp.ineq_upper(i)));
  }
  return 1.0 + scale;
}

std::vector<Constraint> collect_constraints(const QuadraticProgram& qp) {
  std::vector<Constraint> out;
  for (int i = 0; i < qp.equalities(); ++i) {
    out.push_back({qp.eq_matrix.row(i).transpose(), qp.eq_rhs(i), true, -i - 1, Bound::Lower});
  }
  for (int i = 0; i < qp.inequalities(); ++i) {
    const double lo = qp.ineq_lower(i);
    const double hi = qp.ineq_upper(i);
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
      throw Error(Errc::Infeasible, "inequality row " + std::to_string(i) + " has empty bounds");
    }
    const Eigen::VectorXd a = qp.ineq_matrix.row(i).transpose();
    if (lo == hi) {
      out.push_back({a, lo, true, i, Bound::Lower});
      continue;
    }
    if (std::isfinite(lo)) out.push_back({a, lo, false, i, Bound::Lower});
    if (std::isfinite(hi)) out.push_back({-a, -hi, false, i, Bound::Upper});
  }
  return out;
}

// Working factorization: J = L^{-T} Q and R upper triangular such that the
// first iq columns of J^T N_active equal R.
class ActiveSetFactor {
 public:
  explicit ActiveSetFactor(const Eigen::MatrixXd& lower)
      : n_(static_cast<int>(lower.rows())),
        j_(lower.triangularView<Eigen::Lower>()
               .solve(Eigen::MatrixXd::Identity(n_, n_))
               .transpose()),
        r_(Eigen::MatrixXd::Zero(n_, n_)) {}

  int size() const noexcept { return iq_; }

  Eigen::VectorXd project(const Eigen::VectorXd& normal) const { return j_.transpose() * normal; }

  Eigen::VectorXd primal_step(const Eigen::VectorXd& d) const {
    return j_.rightCols(n_ - iq_) * d.tail(n_ - iq_);
  }

  Eigen::VectorXd dual_step(const Eigen::VectorXd& d) const {
    return r_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(d.head(iq_));
  }

  bool dependent(const Eigen::VectorXd& d) const {
    return d.tail(n_ - iq_).norm() <= kDependentTol * std::max(1.0, d.norm());
  }

  // Appends the constraint whose projected normal is d. Caller checks
  // dependent(d) first.
  void add(Eigen::VectorXd d) {
    for (int j = n_ - 1; j > iq_; --j) {
      const double a = d(j - 1);
      const double b = d(j);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      d(j - 1) = h;
      d(j) = 0.0;
      rotate_columns(j - 1, c, s);
    }
    r_.col(iq_).head(iq_ + 1) = d.head(iq_ + 1);
    ++iq_;
  }

  void remove(int pos) {
    for (int k = pos; k < iq_ - 1; ++k) r_.col(k) = r_.col(k + 1);
    r_.col(iq_ - 1).setZero();
    --iq_;
    // Restore triangularity of the Hessenberg block left by the shift.
    for (int j = pos; j < iq_; ++j) {
      const double a = r_(j, j);
      const double b = r_(j + 1, j);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      for (int k = j; k < iq_; ++k) {
        const double rj = r_(j, k);
        const double rj1 = r_(j + 1, k);
        r_(j, k) = c * rj + s * rj1;
        r_(j + 1, k) = -s * rj + c * rj1;
      }
      r_(j + 1, j) = 0.0;
      rotate_columns(j, c, s);
    }
  }

 private:
  void rotate_columns(int j, double c, double s) {
    for (int k = 0; k < n_; ++k) {
      const double a = j_(k, j);
      const double b = j_(k, j + 1);
      j_(k, j) = c * a + s * b;
      j_(k, j + 1) = -s * a + c * b;
    }
  }

  int n_;
  int iq_ = 0;
  Eigen::MatrixXd j_;
  Eigen::MatrixXd r_;
};

QpSolution solve_empty(const QuadraticProgram& qp, double tol) {
  QpSolution sol;
  sol.x = Eigen::VectorXd::Zero(0);
  sol.eq_duals = Eigen::VectorXd::Zero(qp.equalities());
  sol.ineq_duals_lower = Eigen::VectorXd::Zero(qp.inequalities());
  sol.ineq_duals_upper = Eigen::VectorXd::Zero(qp.inequalities());
  for (int i = 0; i < qp.equalities(); ++i) {
    if (std::abs(qp.eq_rhs(i)) > tol) throw Error(Errc::Infeasible, "0 = rhs violated");
  }
  for (int i = 0; i < qp.inequalities(); ++i) {
    if (qp.ineq_lower(i) > tol || qp.ineq_upper(i) < -tol) {
      throw Error(Errc::Infeasible, "bounds exclude the origin");
    }
  }
  return sol;
}

}  // namespace

double KktReport::max() const noexcept {
  return std::max({stationarity, primal_feasibility, dual_feasibility, complementarity});
}

QpSolution solve_qp(const QuadraticProgram& qp, const QpOptions& options) {
  check_dimensions(qp);
  const int n = qp.variables();
  const double scale = rhs_scale(qp);
  const double feas_tol = options.feasibility_tol * scale;
  if (n == 0) return solve_empty(qp, feas_tol);

  const Eigen::MatrixXd hessian = 0.5 * (qp.hessian + qp.hessian.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NotPositiveDefinite, "Cholesky factorization of the Hessian failed");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  const double diag_min = lower.diagonal().minCoeff();
  const double diag_max = lower.diagonal().maxCoeff();
  if (!(diag_min > 1e-10 * diag_max)) {
    throw Error(Errc::NotPositiveDefinite, "Hessian is numerically singular");
  }

  const std::vector<Constraint> cons = collect_constraints(qp);
  const int m_in = qp.inequalities();
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : 50 * (n + m_in) + 10;

  ActiveSetFactor factor(lower);
  Eigen::VectorXd x = -llt.solve(qp.linear);
  std::vector<int> active;        // indices into cons, aligned with u
  std::vector<double> u;          // multipliers of active constraints
  std::vector<char> is_active(cons.size(), 0);
  int iterations = 0;

  auto slack = [&](int p) { return cons[p].normal.dot(x) - cons[p].rhs; };

  // Equalities enter first and never leave.
  for (int p = 0; p < static_cast<int>(cons.size()); ++p) {
    if (!cons[p].equality) continue;
    const Eigen::VectorXd d = factor.project(cons[p].normal);
    if (factor.dependent(d)) {
      if (std::abs(slack(p)) <= feas_tol) continue;  // redundant, multiplier stays 0
      throw Error(Errc::Infeasible, "equality constraints are inconsistent");
    }
    const Eigen::VectorXd z = factor.primal_step(d);
    const Eigen::VectorXd r = factor.dual_step(d);
    const double t = -slack(p) / z.dot(cons[p].normal);
    x += t * z;
    for (int k = 0; k < factor.size(); ++k) u[k] -= t * r(k);
    factor.add(d);
    active.push_back(p);
    u.push_back(t);
    is_active[p] = 1;
  }

  while (true) {
    // Most violated inactive inequality, normalized by its row norm.
    int p = -1;
    double worst = 0.0;
    for (int j = 0; j < static_cast<int>(cons.size()); ++j) {
      if (cons[j].equality || is_active[j]) continue;
      const double s = slack(j);
      if (s >= -feas_tol) continue;
      const double norm = cons[j].normal.norm();
      const double v = norm > 0.0 ? s / norm : s;
      if (p < 0 || v < worst) {
        p = j;
        worst = v;
      }
    }
    if (p < 0) break;

    double up = 0.0;
    while (true) {
      if (++iterations > max_iter) {
        throw Error(Errc::IterationLimit, "active-set iteration cap reached");
      }
      const Eigen::VectorXd d = factor.project(cons[p].normal);
      const Eigen::VectorXd r = factor.dual_step(d);
      const double r_tol = 1e-12 * (1.0 + (r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0));

      // Largest dual step keeping active inequality multipliers nonnegative.
      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < factor.size(); ++k) {
        if (cons[active[k]].equality || r(k) <= r_tol) continue;
        const double ratio = u[k] / r(k);
        if (ratio < t1 || (ratio == t1 && active[k] < active[drop])) {
          t1 = ratio;
          drop = k;
        }
      }

      const bool dependent = factor.dependent(d);
      Eigen::VectorXd z;
      double t2 = kInf;
      if (!dependent) {
        z = factor.primal_step(d);
        t2 = -slack(p) / z.dot(cons[p].normal);
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        throw Error(Errc::Infeasible, "constraint set is empty");
      }

      if (!dependent) x += t * z;
      for (int k = 0; k < factor.size(); ++k) u[k] -= t * r(k);
      up += t;

      if (!dependent && t2 <= t1) {
        factor.add(d);
        active.push_back(p);
        u.push_back(up);
        is_active[p] = 1;
        break;
      }
      is_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
      factor.remove(drop);
    }
  }

  QpSolution sol;
  sol.x = x;
  sol.iterations = iterations;
  sol.eq_duals = Eigen::VectorXd::Zero(qp.equalities());
  sol.ineq_duals_lower = Eigen::VectorXd::Zero(m_in);
  sol.ineq_duals_upper = Eigen::VectorXd::Zero(m_in);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Constraint& c = cons[active[k]];
    const double mult = u[k];
    if (c.row < 0) {
      sol.eq_duals(-c.row - 1) = mult;
    } else if (c.equality) {
      // Pinned two-sided row: split the free multiplier by sign.
      sol.ineq_duals_lower(c.row) = std::max(mult, 0.0);
      sol.ineq_duals_upper(c.row) = std::max(-mult, 0.0);
      sol.active_set.push_back({c.row, mult >= 0.0 ? Bound::Lower : Bound::Upper});
    } else {
      const double clipped = std::max(mult, 0.0);
      if (c.side == Bound::Lower) {
        sol.ineq_duals_lower(c.row) = clipped;
      } else {
        sol.ineq_duals_upper(c.row) = clipped;
      }
      sol.active_set.push_back({c.row, c.side});
    }
  }
  std::sort(sol.active_set.begin(), sol.active_set.end(), [](const ActiveBound& a, const ActiveBound& b) {
    return a.row != b.row ? a.row < b.row : a.side < b.side;
  });
  sol.objective = 0.5 * x.dot(hessian * x) + qp.linear.dot(x);
  sol.kkt_residual = kkt_residual(qp, sol).max();
  return sol;
}

KktReport kkt_residual(const QuadraticProgram& qp, const QpSolution& sol) {
  check_dimensions(qp);
  const int n = qp.variables();
  if (sol.x.size() != n || sol.eq_duals.size() != qp.equalities() ||
      sol.ineq_duals_lower.size() != qp.inequalities() ||
      sol.ineq_duals_upper.size() != qp.inequalities()) {
    throw Error(Errc::DimensionMismatch, "solution does not match program dimensions");
  }
  KktReport rep;
  if (n == 0 && qp.equalities() == 0 && qp.inequalities() == 0) return rep;

  const double scale = rhs_scale(qp);
  const double g_scale = 1.0 + (n > 0 ? qp.linear.cwiseAbs().maxCoeff() : 0.0);

  Eigen::VectorXd grad = qp.hessian * sol.x + qp.linear;
  if (qp.equalities() > 0) grad -= qp.eq_matrix.transpose() * sol.eq_duals;
  if (qp.inequalities() > 0) {
    grad -= qp.ineq_matrix.transpose() * (sol.ineq_duals_lower - sol.ineq_duals_upper);
  }
  rep.stationarity = n > 0 ? grad.cwiseAbs().maxCoeff() / g_scale : 0.0;

  double primal = 0.0;
  double comp = 0.0;
  double dual = 0.0;
  for (int i = 0; i < qp.equalities(); ++i) {
    primal = std::max(primal, std::abs(qp.eq_matrix.row(i).dot(sol.x) - qp.eq_rhs(i)));
  }
  for (int i = 0; i < qp.inequalities(); ++i) {
    const double ax = qp.ineq_matrix.row(i).dot(sol.x);
    const double lo = qp.ineq_lower(i);
    const double hi = qp.ineq_upper(i);
    const double ml = sol.ineq_duals_lower(i);
    const double mu = sol.ineq_duals_upper(i);
    if (std::isfinite(lo)) primal = std::max(primal, lo - ax);
    if (std::isfinite(hi)) primal = std::max(primal, ax - hi);
    dual = std::max({dual, -ml, -mu});
    if (ml != 0.0) comp = std::max(comp, std::isfinite(lo) ? std::abs(ml * (ax - lo)) : kInf);
    if (mu != 0.0) comp = std::max(comp, std::isfinite(hi) ? std::abs(mu * (hi - ax)) : kInf);
  }
  rep.primal_feasibility = primal / scale;
  rep.complementarity = comp / scale;
  rep.dual_feasibility = dual;
  return rep;
}

}  // namespace eshare
