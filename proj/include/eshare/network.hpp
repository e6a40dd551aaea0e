#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace eshare {

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

/// Oriented line between two buses (0-based indices). Flow is positive in the
/// from -> to direction. A limit of kUnlimited means no flow constraint.
struct LineSpec {
  int from = 0;
  int to = 0;
  double weight = 1.0;
  double limit = kUnlimited;
};

/// Immutable DC network with its line-flow distribution factor matrix.
///
/// The distribution factors map nodal *withdrawals* q (q_i > 0 for a buyer) to
/// line flows: flow = ptdf()^T q. The row belonging to the slack bus is zero.
class NetworkModel {
 public:
  /// Validates the topology and builds the distribution factors. Throws
  /// Error{DisconnectedGraph, NonpositiveWeight, SingularLaplacian,
  /// InvalidArgument}.
  NetworkModel(int bus_count, std::vector<LineSpec> lines, int slack);

  int bus_count() const noexcept { return bus_count_; }
  int line_count() const noexcept { return static_cast<int>(lines_.size()); }
  int slack() const noexcept { return slack_; }
  const std::vector<LineSpec>& lines() const noexcept { return lines_; }

  /// bus_count x line_count matrix of distribution factors.
  const Eigen::MatrixXd& ptdf() const noexcept { return ptdf_; }

  Eigen::VectorXd limits() const;

 private:
  int bus_count_;
  int slack_;
  std::vector<LineSpec> lines_;
  Eigen::MatrixXd ptdf_;
};

/// Slack defaults to the highest-index bus.
NetworkModel build_network(int bus_count, std::vector<LineSpec> lines,
                           std::optional<int> slack = std::nullopt);

/// flow_l = sum_i ptdf(i, l) * withdrawals_i. No balance precondition.
Eigen::VectorXd line_flows(const NetworkModel& network, const Eigen::VectorXd& withdrawals);

/// Angle-based DC flow for a balanced injection vector (injection = -withdrawal).
/// Solves the reduced Laplacian for bus angles with the slack angle fixed at
/// zero; flow_l = weight_l * (theta_from - theta_to). Independent of ptdf().
Eigen::VectorXd dc_flow_oracle(const NetworkModel& network, const Eigen::VectorXd& injections);

/// True iff the (connected) network is a tree.
bool is_radial(const NetworkModel& network) noexcept;

}  // namespace eshare
