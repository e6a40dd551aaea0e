#include "eshare/network.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "eshare/error.hpp"

namespace eshare {

namespace {

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

bool connected(int bus_count, const std::vector<LineSpec>& lines) {
  std::vector<int> parent(bus_count);
  std::iota(parent.begin(), parent.end(), 0);
  int components = bus_count;
  for (const auto& line : lines) {
    int a = find_root(parent, line.from);
    int b = find_root(parent, line.to);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

void validate(int bus_count, const std::vector<LineSpec>& lines, int slack) {
  if (bus_count < 1) {
    throw Error(Errc::InvalidArgument, "bus_count must be positive");
  }
  if (slack < 0 || slack >= bus_count) {
    throw Error(Errc::InvalidArgument, "slack bus " + std::to_string(slack + 1) + " out of range");
  }
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto& line = lines[l];
    const std::string where = "line " + std::to_string(l + 1);
    if (line.from < 0 || line.from >= bus_count || line.to < 0 || line.to >= bus_count) {
      throw Error(Errc::InvalidArgument, where + " references a bus out of range");
    }
    if (line.from == line.to) {
      throw Error(Errc::InvalidArgument, where + " is a self-loop");
    }
    if (!(line.weight > 0.0) || !std::isfinite(line.weight)) {
      throw Error(Errc::NonpositiveWeight, where + " has weight " + std::to_string(line.weight));
    }
    if (std::isnan(line.limit) || line.limit < 0.0) {
      throw Error(Errc::InvalidArgument, where + " has a negative flow limit");
    }
  }
  if (!connected(bus_count, lines)) {
    throw Error(Errc::DisconnectedGraph, "network graph is not connected");
  }
}

// Index mapping that skips the slack bus.
int reduced_index(int bus, int slack) { return bus < slack ? bus : bus - 1; }

}  // namespace

NetworkModel::NetworkModel(int bus_count, std::vector<LineSpec> lines, int slack)
    : bus_count_(bus_count), slack_(slack), lines_(std::move(lines)) {
  validate(bus_count_, lines_, slack_);

  const int n = bus_count_;
  const int m = line_count();
  ptdf_ = Eigen::MatrixXd::Zero(n, m);
  if (n == 1 || m == 0) return;

  // Reduced incidence matrix (slack row removed) and diagonal line weights.
  Eigen::MatrixXd incidence = Eigen::MatrixXd::Zero(n - 1, m);
  Eigen::VectorXd weights(m);
  for (int l = 0; l < m; ++l) {
    const auto& line = lines_[l];
    if (line.from != slack_) incidence(reduced_index(line.from, slack_), l) = 1.0;
    if (line.to != slack_) incidence(reduced_index(line.to, slack_), l) = -1.0;
    weights(l) = line.weight;
  }
  const Eigen::MatrixXd weighted = incidence * weights.asDiagonal();
  const Eigen::MatrixXd laplacian = weighted * incidence.transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(laplacian);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::SingularLaplacian, "reduced Laplacian is not positive definite");
  }
  const Eigen::MatrixXd reduced = -llt.solve(weighted);

  for (int bus = 0; bus < n; ++bus) {
    if (bus == slack_) continue;
    ptdf_.row(bus) = reduced.row(reduced_index(bus, slack_));
  }
}

Eigen::VectorXd NetworkModel::limits() const {
  Eigen::VectorXd out(line_count());
  for (int l = 0; l < line_count(); ++l) out(l) = lines_[l].limit;
  return out;
}

NetworkModel build_network(int bus_count, std::vector<LineSpec> lines, std::optional<int> slack) {
  return NetworkModel(bus_count, std::move(lines), slack.value_or(bus_count - 1));
}

Eigen::VectorXd line_flows(const NetworkModel& network, const Eigen::VectorXd& withdrawals) {
  if (withdrawals.size() != network.bus_count()) {
    throw Error(Errc::DimensionMismatch, "withdrawal vector has length " +
                                             std::to_string(withdrawals.size()) + ", expected " +
                                             std::to_string(network.bus_count()));
  }
  return network.ptdf().transpose() * withdrawals;
}

Eigen::VectorXd dc_flow_oracle(const NetworkModel& network, const Eigen::VectorXd& injections) {
  const int n = network.bus_count();
  if (injections.size() != n) {
    throw Error(Errc::DimensionMismatch, "injection vector has wrong length");
  }
  const double imbalance = injections.sum();
  if (std::abs(imbalance) > 1e-9 * (1.0 + injections.cwiseAbs().sum())) {
    throw Error(Errc::UnbalancedInjection, "injections sum to " + std::to_string(imbalance));
  }

  const int slack = network.slack();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  if (n > 1) {
    // Nodal susceptance matrix stamped line by line, slack row/column dropped.
    Eigen::MatrixXd susceptance = Eigen::MatrixXd::Zero(n - 1, n - 1);
    for (const auto& line : network.lines()) {
      const bool f = line.from != slack;
      const bool t = line.to != slack;
      const int rf = reduced_index(line.from, slack);
      const int rt = reduced_index(line.to, slack);
      if (f) susceptance(rf, rf) += line.weight;
      if (t) susceptance(rt, rt) += line.weight;
      if (f && t) {
        susceptance(rf, rt) -= line.weight;
        susceptance(rt, rf) -= line.weight;
      }
    }
    Eigen::VectorXd rhs(n - 1);
    for (int bus = 0; bus < n; ++bus) {
      if (bus != slack) rhs(reduced_index(bus, slack)) = injections(bus);
    }
    const Eigen::VectorXd reduced = susceptance.fullPivLu().solve(rhs);
    for (int bus = 0; bus < n; ++bus) {
      if (bus != slack) theta(bus) = reduced(reduced_index(bus, slack));
    }
  }

  Eigen::VectorXd flows(network.line_count());
  for (int l = 0; l < network.line_count(); ++l) {
    const auto& line = network.lines()[l];
    flows(l) = line.weight * (theta(line.from) - theta(line.to));
  }
  return flows;
}

bool is_radial(const NetworkModel& network) noexcept {
  return network.line_count() == network.bus_count() - 1;
}

}  // namespace eshare
