#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "eshare/market.hpp"

namespace eshare::oracle {

// Exact minimizer of 0.5 x'Hx + g'x over l <= Ax <= u in two variables by
// enumerating the free point, every single active row and every vertex.
Eigen::Vector2d enumerate_qp_2d(const Eigen::Matrix2d& H, const Eigen::Vector2d& g, const Eigen::MatrixX2d& A,
                                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

double grid_minimize_1d(const std::function<double(double)>& f, double lo, double hi, double coarse_step,
                        double final_step);

// Two buses, slack at bus 2: the single line carries -q1, so balance plus the
// limit reduce to clamping the unconstrained transfer.
struct TwoBusClearing {
  Eigen::Vector2d lambda;
  Eigen::Vector2d q;
};
TwoBusClearing two_bus_clearing(double a, const Eigen::Vector2d& b, double F);

// Two-bus central problem reduced to p1 with p2 = D1 + D2 - p1 and |D1 - p1| <= F.
Eigen::Vector2d two_bus_central(const Eigen::Vector2d& c, const Eigen::Vector2d& d, const Eigen::Vector2d& D,
                                double F, double weight);

// Random tree on n buses (random recursive attachment), unit-ish weights.
std::vector<LineSpec> random_tree(std::uint64_t seed, int n);

double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eshare::oracle
