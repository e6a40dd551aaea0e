#include <gtest/gtest.h>

#include "eshare/brlab.hpp"
#include "eshare/equilibrium.hpp"
#include "eshare/error.hpp"
#include "eshare/generator.hpp"
#include "oracles.hpp"

using namespace eshare;

namespace {

Scenario two_prosumers(double F, double a = 10.0) {
  return make_scenario(build_network(2, {{0, 1, 1.0, F}}), {{0.003, 0.42, 100.0, {}}, {0.006, 0.72, 200.0, {}}}, a);
}

const Eigen::Vector2d kC(0.003, 0.006);
const Eigen::Vector2d kD(0.42, 0.72);
const Eigen::Vector2d kDemand(100.0, 200.0);

}  // namespace

TEST(Equilibrium, SocialOptimumTwoProsumers) {
  const SocialOptimum so = social_optimum(two_prosumers(10.0));
  EXPECT_NEAR(so.p_tilde(0), 110.0, 1e-9);
  EXPECT_NEAR(so.p_tilde(1), 190.0, 1e-9);
  EXPECT_NEAR(so.costs(0), 82.5, 1e-9);
  EXPECT_NEAR(so.costs(1), 353.4, 1e-9);
  EXPECT_NEAR(so.total_cost, 435.9, 1e-9);
  EXPECT_LE(so.kkt_residual, 1e-8);

  const SocialOptimum wide = social_optimum(two_prosumers(200.0));
  EXPECT_NEAR(wide.p_tilde(0), 216.6667, 1e-4);
  EXPECT_NEAR(wide.p_tilde(1), 83.3333, 1e-4);
  const Eigen::Vector2d ref = oracle::two_bus_central(kC, kD, kDemand, 200.0, 0.0);
  EXPECT_LE((wide.p_tilde - Eigen::VectorXd(ref)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Equilibrium, SymmetricProsumersStayAtHome) {
  const Scenario s = make_scenario(build_network(3, {{0, 1, 1.0, 1.0}, {1, 2, 1.0, 1.0}}),
                                   {{0.01, 0.5, 50.0, {}}, {0.01, 0.5, 50.0, {}}, {0.01, 0.5, 50.0, {}}}, 100.0);
  EXPECT_LE((social_optimum(s).p_tilde - s.D()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(poa(s).poa, 1.0, 1e-12);
}

TEST(Equilibrium, CentralSolutionMatchesReduction) {
  for (double F : {10.0, 5.0}) {
    const CentralSolution cs = central_solution(two_prosumers(F));
    const Eigen::Vector2d ref = oracle::two_bus_central(kC, kD, kDemand, F, 1.0 / 10.0);
    EXPECT_LE((cs.p - Eigen::VectorXd(ref)).cwiseAbs().maxCoeff(), 1e-9);
  }
  const CentralSolution congested = central_solution(two_prosumers(5.0));
  EXPECT_NEAR(congested.p(0), 105.0, 1e-9);
  EXPECT_GT(congested.tau_upper(0) + congested.tau_lower(0), 0.0);
}

TEST(Equilibrium, ThreeBusPathClosedForm) {
  const Scenario s = three_bus_scenario(1.0, Eigen::Vector3d(1.0, 1.0, 0.0), 0.3);
  const CentralSolution cs = central_solution(s);
  const double c = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double expected = s.D()(i) / (4.0 * c + 1.0) + 4.0 * c * s.D().sum() / (12.0 * c + 3.0);
    EXPECT_NEAR(cs.p(i), expected, 1e-9);
  }
  const EquilibriumResult e = improved_gne(s);
  EXPECT_LE((e.b_bar - Eigen::Vector3d(1.6, 1.6, 0.8)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Equilibrium, ImprovedGneFixtures) {
  const EquilibriumResult f10 = improved_gne(two_prosumers(10.0));
  EXPECT_NEAR(f10.p_bar(0), 109.6, 0.05);
  EXPECT_NEAR(f10.b_bar(0), 10.78, 0.05);
  EXPECT_NEAR(f10.p_bar(1), 190.4, 0.05);
  EXPECT_NEAR(f10.b_bar(1), 30.04, 0.05);
  EXPECT_LE(f10.price_consistency, 1e-6);

  const Scenario s5 = two_prosumers(5.0);
  const EquilibriumResult f5 = improved_gne(s5);
  EXPECT_NEAR(f5.b_bar(0), 10.5, 1e-9);
  EXPECT_NEAR(f5.b_bar(1), 30.6, 1e-9);
  EXPECT_NEAR(f5.costs(1), 381.35, 1e-9);
  EXPECT_NEAR(f5.net_payment, 5.05, 1e-9);
  const NetPayment np = net_payment(s5, f5);
  EXPECT_NEAR(np.payment, np.congestion_rent, 1e-9);
  EXPECT_LE(price_structure_residual(s5, f5), 1e-9);
  for (bool ok : pareto_check(s5, f5)) EXPECT_TRUE(ok);
}

TEST(Equilibrium, UncongestedHasZeroNetPayment) {
  const Scenario s = two_prosumers(200.0);
  const EquilibriumResult e = improved_gne(s);
  EXPECT_NEAR(e.net_payment, 0.0, 1e-9);
  EXPECT_NEAR(e.lambda_r(0), -e.kappa, 1e-12);
  EXPECT_NEAR(e.lambda_r(1), -e.kappa, 1e-12);
}

TEST(Equilibrium, VariationalEquilibrium) {
  const Scenario s = two_prosumers(10.0);
  const VariationalEquilibrium v = variational_equilibrium(s);
  EXPECT_TRUE(v.warnings.empty());
  const CentralSolution cs = central_solution(s);
  const double l0 = 2.0 * 0.003 * cs.p(0) + 0.42 + (100.0 - cs.p(0)) / 10.0;
  EXPECT_NEAR(v.lambda_bar(0), l0, 1e-12);
  EXPECT_NEAR(v.lambda_bar(0), 0.1145, 1e-3);
  EXPECT_NEAR(v.lambda_bar(1), 3.968, 1e-3);
  EXPECT_NEAR(v.b_bar(0), 10.0 * v.lambda_bar(0) + 100.0 - cs.p(0), 1e-10);

  const Scenario ex = three_bus_scenario(1.0, Eigen::Vector3d(1.0, 1.0, 0.0), 0.3);
  const VariationalEquilibrium vx = variational_equilibrium(ex);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(vx.b_bar(i), 2.0 * vx.p_bar(i) + 2.0 * (ex.D()(i) - vx.p_bar(i)), 1e-12);
  }

  const Scenario mesh = make_scenario(build_network(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}),
                                      {{1.0, 0, 1, {}}, {1.0, 0, 1, {}}, {1.0, 0, 1, {}}}, 1.0);
  const VariationalEquilibrium vm = variational_equilibrium(mesh);
  EXPECT_EQ(vm.warnings.size(), 1u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(vm.b_bar(i), 2.0 * 1.0, 1e-12);
    EXPECT_NEAR(vm.lambda_bar(i), 2.0, 1e-12);
  }
}

TEST(Equilibrium, PriceTaking) {
  const PriceTakingEquilibrium wide = price_taking_equilibrium(two_prosumers(200.0));
  EXPECT_NEAR(wide.lambda_tilde(0), 1.72, 1e-9);
  EXPECT_NEAR(wide.lambda_tilde(1), 1.72, 1e-9);
  const PriceTakingEquilibrium tight = price_taking_equilibrium(two_prosumers(10.0));
  EXPECT_GT(std::abs(tight.lambda_tilde(0) - tight.lambda_tilde(1)), 1.0);
  EXPECT_LE(tight.marginal_residual, 1e-9);
}

TEST(Equilibrium, SelfSufficiency) {
  const SelfSufficiency ss = self_sufficiency(two_prosumers(5.0));
  EXPECT_NEAR(ss.costs(0), 72.0, 1e-9);
  EXPECT_NEAR(ss.costs(1), 384.0, 1e-9);
  EXPECT_NEAR(ss.total, 456.0, 1e-9);
  const Scenario unit = make_scenario(build_network(2, {{0, 1}}), {{1.0, 0.0, 1.0, {}}, {1.0, 0.0, 0.0, {}}}, 1.0);
  EXPECT_NEAR(self_sufficiency(unit).costs(0), 1.0, 1e-15);
  EXPECT_EQ(self_sufficiency(unit).costs(1), 0.0);
}

TEST(Equilibrium, PriceOfAnarchy) {
  const PoaReport r = poa(two_prosumers(10.0));
  EXPECT_NEAR(r.poa, 436.6 / 435.9, 2e-4);
  ASSERT_TRUE(r.upper_bound.has_value());
  EXPECT_NEAR(*r.upper_bound, 1.0 + 100.0 / (2.0 * 10.0 * 82.5), 1e-9);
  EXPECT_GE(r.poa, 1.0);
  EXPECT_LE(r.poa, *r.upper_bound);

  const Scenario zero = make_scenario(build_network(2, {{0, 1}}), {{1.0, 0.0, 0.0, {}}, {1.0, 0.0, 0.0, {}}}, 1.0);
  try {
    poa(zero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateBaseline);
  }
}

TEST(Equilibrium, PoaNonIncreasingOnReplicatedPopulation) {
  double previous = 2.0;
  for (int copies = 1; copies <= 6; ++copies) {
    std::vector<Prosumer> pros;
    std::vector<LineSpec> lines;
    for (int k = 0; k < copies; ++k) {
      pros.push_back({0.003, 0.42, 100.0, {}});
      pros.push_back({0.006, 0.72, 200.0, {}});
    }
    for (int k = 1; k < 2 * copies; ++k) lines.push_back({k - 1, k, 1.0, kUnlimited});
    const double value = poa(make_scenario(build_network(2 * copies, lines), pros, 10.0)).poa;
    EXPECT_LE(value, previous + 1e-12);
    EXPECT_GE(value, 1.0 - 1e-12);
    previous = value;
  }
}

class EquilibriumProperty : public ::testing::TestWithParam<int> {};

TEST_P(EquilibriumProperty, TheoremIdentities) {
  const int seed = GetParam();
  const int n = 2 + seed % 19;
  const Scenario s = generate_scenario(100 + seed, n);
  const EquilibriumResult e = improved_gne(s);
  const double scale = 1.0 + e.b_bar.cwiseAbs().maxCoeff();

  EXPECT_LE(e.price_consistency, 1e-6 * scale);
  EXPECT_LE(e.quantity_consistency, 1e-6 * scale);
  EXPECT_LE(price_structure_residual(s, e), 1e-6);
  const NetPayment np = net_payment(s, e);
  EXPECT_NEAR(np.payment, np.congestion_rent, 1e-6 * (1.0 + std::abs(np.payment)));
  EXPECT_GE(np.payment, -1e-8);
  for (bool ok : pareto_check(s, e)) EXPECT_TRUE(ok);

  const SocialOptimum so = social_optimum(s);
  const double omega = (s.D() - so.p_tilde).squaredNorm();
  EXPECT_LE(so.total_cost, e.total_disutility + 1e-9 * so.total_cost);
  EXPECT_LE(e.total_disutility, so.total_cost + omega / (2.0 * s.a * (n - 1)) + 1e-9 * so.total_cost);
}

TEST_P(EquilibriumProperty, CentralApproachesSocialAsSensitivityGrows) {
  const int seed = GetParam();
  const int n = 2 + seed % 7;
  const Scenario base = generate_scenario(300 + seed, n);
  const SocialOptimum so = social_optimum(base);
  double previous = std::numeric_limits<double>::infinity();
  for (double factor : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    const CentralSolution cs = solve_central(base, 1.0 / (factor * base.a * (n - 1)));
    const double gap = (cs.p - so.p_tilde).cwiseAbs().maxCoeff();
    EXPECT_LE(gap, previous + 1e-9);
    previous = gap;
  }
  EXPECT_LE(previous, 1.0);
}

INSTANTIATE_TEST_SUITE_P(Seeds, EquilibriumProperty, ::testing::Range(1, 51));

TEST(EquilibriumProperty, RegulatedBestResponsesAtEquilibrium) {
  for (int seed = 1; seed <= 5; ++seed) {
    const Scenario s = generate_scenario(500 + seed, 3 + seed);
    const EquilibriumResult e = improved_gne(s);
    ScanConfig cfg;
    cfg.mode = CostMode::Regulated;
    cfg.coarse_points = 801;
    for (int i = 0; i < s.size(); ++i) {
      const BestResponseScan scan = best_response(s, i, e.b_bar, cfg);
      EXPECT_LE(scan.current_value - scan.min_value, 1e-6 * (1.0 + std::abs(scan.min_value)))
          << "seed " << seed << " prosumer " << i;
    }
  }
}
