#include "eshare/brlab.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "eshare/error.hpp"

namespace eshare {

namespace {

void check_profile(const Scenario& s, int i, const Eigen::VectorXd& bids) {
  if (bids.size() != s.size()) throw Error(Errc::DimensionMismatch, "bid vector has wrong length");
  if (i < 0 || i >= s.size()) {
    throw Error(Errc::InvalidArgument, "prosumer " + std::to_string(i + 1) + " out of range");
  }
}

bool nearly_equal(double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x) + std::abs(y)); }

}  // namespace

std::pair<double, double> auto_scan_interval(const Scenario& s, int i, const Eigen::VectorXd& bids) {
  check_profile(s, i, bids);
  const Prosumer& pr = s.prosumers[i];
  double others = 0.0;
  for (int j = 0; j < s.size(); ++j) {
    if (j != i) others += std::abs(s.prosumers[j].D);
  }
  auto heuristic = [&](double p) { return pr.D - p + s.a * (2.0 * pr.c * p + pr.d); };
  const double p_lo = std::min(0.0, pr.D);
  const double p_hi = std::max(0.0, pr.D) + others;
  double lo = std::min(heuristic(p_lo), heuristic(p_hi));
  double hi = std::max(heuristic(p_lo), heuristic(p_hi));
  lo = std::min(lo, bids.minCoeff());
  hi = std::max(hi, bids.maxCoeff());
  const double center = 0.5 * (lo + hi);
  const double half = std::max(1.0, 1.5 * (hi - lo));
  return {center - half, center + half};
}

BestResponseScan best_response(const Scenario& s, int i, const Eigen::VectorXd& bids,
                               const ScanConfig& config) {
  check_profile(s, i, bids);
  const auto [lo, hi] = config.interval.value_or(auto_scan_interval(s, i, bids));
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(Errc::ScanIntervalEmpty, "scan interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "] is empty");
  }
  if (config.coarse_points < 3 || config.refine_factor < 1 || config.refine_rounds < 0) {
    throw Error(Errc::InvalidArgument, "scan grid needs at least 3 points");
  }

  Eigen::VectorXd profile = bids;
  auto cost = [&](double bi) {
    profile(i) = bi;
    return prosumer_cost(s, profile, i, config.mode);
  };

  BestResponseScan out;
  out.prosumer = i;
  out.bids = bids;
  out.lo = lo;
  out.hi = hi;
  out.current_value = cost(bids(i));

  const int m = config.coarse_points;
  const double step = (hi - lo) / (m - 1);
  out.samples.resize(m);
  for (int k = 0; k < m; ++k) {
    const double bk = k == m - 1 ? hi : lo + k * step;
    out.samples[k] = {bk, cost(bk)};
  }

  std::vector<ScanPoint> minima;
  for (int k = 0; k < m; ++k) {
    const double g = out.samples[k].gamma;
    const bool left = k == 0 || g < out.samples[k - 1].gamma;
    const bool right = k == m - 1 || g <= out.samples[k + 1].gamma;
    if (!(left && right)) continue;

    ScanPoint best = out.samples[k];
    double h = step;
    for (int round = 0; round < config.refine_rounds; ++round) {
      const double center = best.b;
      const double fine = h / config.refine_factor;
      for (int j = -config.refine_factor; j <= config.refine_factor; ++j) {
        const double bj = std::clamp(center + j * fine, lo, hi);
        const double gj = cost(bj);
        if (gj < best.gamma && !nearly_equal(gj, best.gamma)) {
          best = {bj, gj};
        }
      }
      h = fine;
    }
    minima.push_back(best);
  }

  std::sort(minima.begin(), minima.end(), [](const ScanPoint& x, const ScanPoint& y) { return x.b < y.b; });
  for (const auto& mp : minima) {
    if (!out.minima.empty() && mp.b - out.minima.back().b <= config.distinct_spacing) {
      if (mp.gamma < out.minima.back().gamma) out.minima.back() = mp;
      continue;
    }
    out.minima.push_back(mp);
  }

  const double current = bids(i);
  const ScanPoint* best = nullptr;
  for (const auto& mp : out.minima) {
    if (!best || (mp.gamma < best->gamma && !nearly_equal(mp.gamma, best->gamma)) ||
        (nearly_equal(mp.gamma, best->gamma) && std::abs(mp.b - current) < std::abs(best->b - current))) {
      best = &mp;
    }
  }
  out.argmin = best->b;
  out.min_value = best->gamma;
  return out;
}

GneVerification verify_gne(const Scenario& s, const Eigen::VectorXd& bids, double tol,
                           const ScanConfig& config) {
  const int n = s.size();
  GneVerification out;
  out.gaps.resize(n);
  out.current_cost.resize(n);
  out.best_cost.resize(n);
  out.best_bid.resize(n);
  for (int i = 0; i < n; ++i) {
    const BestResponseScan scan = best_response(s, i, bids, config);
    out.current_cost(i) = scan.current_value;
    out.best_cost(i) = scan.min_value;
    out.best_bid(i) = scan.argmin;
    out.gaps(i) = std::max(0.0, scan.current_value - scan.min_value);
    if (out.gaps(i) > tol) out.is_gne = false;
  }
  return out;
}

TwoBusPoint GneClassification2Bus::at(double b2) const {
  TwoBusPoint pt;
  switch (regime) {
    case GneRegime::Unique:
      return point;
    case GneRegime::MultipleUpper:
      pt.b = {b2 + 2.0 * F, b2};
      pt.lambda = {pt.b(0) - F, b2 + F};
      break;
    case GneRegime::MultipleLower:
      pt.b = {b2 - 2.0 * F, b2};
      pt.lambda = {pt.b(0) + F, b2 - F};
      break;
  }
  pt.p = Eigen::Vector2d(D1, D2) + pt.lambda - pt.b;
  return pt;
}

GneClassification2Bus classify_gne_2bus(double c, double D1, double D2, double F) {
  if (!(c > 0.0) || !(F >= 0.0)) throw Error(Errc::InvalidArgument, "c must be positive and F nonnegative");
  GneClassification2Bus out;
  out.c = c;
  out.D1 = D1;
  out.D2 = D2;
  out.F = F;
  const double threshold = (2.0 * c + 1.0) * F / c;
  const double gap = D1 - D2;
  if (std::abs(gap) < threshold) {
    out.regime = GneRegime::Unique;
    const double shift = c / (2.0 * c + 1.0) * gap;
    const double mid = c * (D1 + D2);
    out.point.b = {mid + shift, mid - shift};
    out.point.lambda = {mid, mid};
    out.point.p = Eigen::Vector2d(D1, D2) + out.point.lambda - out.point.b;
    out.b2_lo = out.b2_hi = out.point.b(1);
    out.b1_offset = out.point.b(0) - out.point.b(1);
    return out;
  }
  if (gap > 0.0) {
    out.regime = GneRegime::MultipleUpper;
    out.b2_lo = 2.0 * c * D2 + 2.0 * c * F;
    out.b2_hi = 2.0 * c * D1 - 2.0 * (c + 1.0) * F;
    out.b1_offset = 2.0 * F;
  } else {
    out.regime = GneRegime::MultipleLower;
    out.b2_lo = 2.0 * c * D1 + 2.0 * (c + 1.0) * F;
    out.b2_hi = 2.0 * c * D2 - 2.0 * c * F;
    out.b1_offset = -2.0 * F;
  }
  out.point = out.at(0.5 * (out.b2_lo + out.b2_hi));
  return out;
}

Scenario two_bus_scenario(double c, double D1, double D2, double F) {
  NetworkModel net = build_network(2, {{0, 1, 1.0, F}});
  return make_scenario(std::move(net), {{c, 0.0, D1, {}}, {c, 0.0, D2, {}}}, 1.0);
}

Scenario three_bus_scenario(double c, const Eigen::Vector3d& D, double F) {
  NetworkModel net = build_network(3, {{0, 1, 1.0, F}, {1, 2, 1.0, kUnlimited}});
  return make_scenario(std::move(net), {{c, 0.0, D(0), {}}, {c, 0.0, D(1), {}}, {c, 0.0, D(2), {}}}, 1.0);
}

BrIteration br_iteration(const Scenario& s, const Eigen::VectorXd& b0, int max_sweeps, double tol,
                         const ScanConfig& config) {
  if (b0.size() != s.size()) throw Error(Errc::DimensionMismatch, "bid vector has wrong length");
  BrIteration out;
  Eigen::VectorXd b = b0;
  out.trajectory.push_back(b);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int i = 0; i < s.size(); ++i) b(i) = best_response(s, i, b, config).argmin;
    out.trajectory.push_back(b);
    out.sweeps = sweep;

    const double state_tol = 1e-4 * (1.0 + b.cwiseAbs().maxCoeff());
    const Eigen::VectorXd& prev = out.trajectory[out.trajectory.size() - 2];
    if ((b - prev).cwiseAbs().maxCoeff() <= state_tol) {
      GneVerification v = verify_gne(s, b, tol, config);
      out.status = v.is_gne ? BrStatus::FixedPoint : BrStatus::MaxIterExceeded;
      out.verification = std::move(v);
      return out;
    }
    for (std::size_t k = 0; k + 2 < out.trajectory.size(); ++k) {
      if ((b - out.trajectory[k]).cwiseAbs().maxCoeff() <= state_tol) {
        out.status = BrStatus::Cycling;
        return out;
      }
    }
  }
  out.status = BrStatus::MaxIterExceeded;
  return out;
}

Example2Prices example2_region(const Scenario& s, const Eigen::VectorXd& bids) {
  if (s.size() != 3 || std::abs(s.a - 1.0) > 1e-12 || !is_radial(s.network)) {
    throw Error(Errc::WrongTopology, "expected three buses on a tree with a = 1");
  }
  int limited = -1;
  int degree0 = 0;
  for (int l = 0; l < s.network.line_count(); ++l) {
    const LineSpec& line = s.network.lines()[l];
    if (line.from == 0 || line.to == 0) ++degree0;
    if (std::isfinite(line.limit)) {
      if (limited >= 0) throw Error(Errc::WrongTopology, "more than one limited line");
      limited = l;
    }
  }
  if (limited < 0 || degree0 != 1) throw Error(Errc::WrongTopology, "bus 1 must be a leaf behind the limited line");
  const LineSpec& line = s.network.lines()[limited];
  if (line.from != 0 && line.to != 0) throw Error(Errc::WrongTopology, "limited line must attach bus 1");
  if (bids.size() != 3) throw Error(Errc::DimensionMismatch, "bid vector has wrong length");

  const double F = line.limit;
  const double rest = bids(1) + bids(2);
  Example2Prices out;
  if (bids(0) <= 0.5 * (rest - 3.0 * F)) {
    out.region = Example2Region::Lower;
    out.lambda = {bids(0) + F, 0.5 * (rest - F), 0.5 * (rest - F)};
  } else if (bids(0) >= 0.5 * (rest + 3.0 * F)) {
    out.region = Example2Region::Upper;
    out.lambda = {bids(0) - F, 0.5 * (rest + F), 0.5 * (rest + F)};
  } else {
    out.region = Example2Region::Middle;
    out.lambda = Eigen::Vector3d::Constant(bids.sum() / 3.0);
  }
  return out;
}

void write_scan_csv(std::ostream& os, const BestResponseScan& scan) {
  os << "b,gamma\n";
  os.precision(17);
  for (const auto& pt : scan.samples) os << pt.b << ',' << pt.gamma << '\n';
}

}  // namespace eshare
