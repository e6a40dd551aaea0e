#include "eshare/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eshare/equilibrium.hpp"
#include "eshare/error.hpp"

namespace eshare {

namespace {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}

  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }
  int below(int n) { return std::min(n - 1, static_cast<int>((*this)() * n)); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

TreeStyle parse_tree_style(const std::string& name) {
  if (name == "radial") return TreeStyle::Radial;
  if (name == "path") return TreeStyle::Path;
  if (name == "star") return TreeStyle::Star;
  throw Error(Errc::UsageError, "unknown tree style '" + name + "'");
}

Scenario generate_scenario(std::uint64_t seed, int size, const GeneratorOptions& opt) {
  if (size < 2) throw Error(Errc::TooFewProsumers, "generator needs at least two buses");
  Uniform u(seed);

  std::vector<Prosumer> prosumers(size);
  for (auto& pr : prosumers) {
    pr.c = u(opt.c_min, opt.c_max);
    pr.d = u(opt.d_min, opt.d_max);
    pr.D = u(opt.D_min, opt.D_max);
  }

  std::vector<LineSpec> lines;
  for (int k = 1; k < size; ++k) {
    int parent = 0;
    switch (opt.style) {
      case TreeStyle::Radial: parent = u.below(k); break;
      case TreeStyle::Path: parent = k - 1; break;
      case TreeStyle::Star: parent = 0; break;
    }
    lines.push_back({parent, k, u(opt.weight_min, opt.weight_max), kUnlimited});
  }

  double a = opt.a.value_or(0.0);
  if (!opt.a) {
    for (const auto& pr : prosumers) a = std::max(a, 1.0 / pr.c);
  }

  // Size the limits from the flows of the unconstrained social optimum.
  const Scenario free_flow = make_scenario(build_network(size, lines), prosumers, a);
  const SocialOptimum so = social_optimum(free_flow);
  const Eigen::VectorXd flows = line_flows(free_flow.network, free_flow.D() - so.p_tilde);
  const double floor = 0.01 * free_flow.D().cwiseAbs().mean();
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const double factor = u(opt.limit_factor_min, opt.limit_factor_max);
    lines[l].limit = std::max(floor, factor * std::abs(flows(static_cast<Eigen::Index>(l))));
  }

  return make_scenario(build_network(size, std::move(lines)), std::move(prosumers), a,
                       "generated seed=" + std::to_string(seed) + " size=" + std::to_string(size), "p.u.");
}

}  // namespace eshare
