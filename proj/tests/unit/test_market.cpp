#include <gtest/gtest.h>

#include <random>

#include "eshare/brlab.hpp"
#include "eshare/error.hpp"
#include "eshare/generator.hpp"
#include "eshare/market.hpp"
#include "oracles.hpp"

using namespace eshare;

namespace {

Scenario two_prosumers(double F) {
  return make_scenario(build_network(2, {{0, 1, 1.0, F}}), {{0.003, 0.42, 100.0, {}}, {0.006, 0.72, 200.0, {}}},
                       10.0);
}

}  // namespace

TEST(Market, UniformPriceWithoutCongestion) {
  const Scenario s = three_bus_scenario(1.0, Eigen::Vector3d(1.0, 1.0, 0.0), 1e6);
  const Eigen::Vector3d b(1.6, 1.6, 0.8);
  const ClearingOutcome c = clear_market(s, b);
  EXPECT_LE((c.lambda - Eigen::Vector3d::Constant(4.0 / 3.0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(c.q(0), 0.2667, 1e-4);
  EXPECT_NEAR(c.q(2), -0.5333, 1e-4);
}

TEST(Market, ZeroBids) {
  const Scenario s = two_prosumers(5.0);
  const ClearingOutcome c = clear_market(s, Eigen::Vector2d::Zero());
  EXPECT_EQ(c.lambda.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(c.q.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Market, CongestedTwoBusCase) {
  const Scenario s = two_prosumers(5.0);
  const Eigen::Vector2d b(10.5, 30.6);
  const ClearingOutcome c = clear_market(s, b);
  EXPECT_NEAR(c.lambda(0), 1.55, 1e-12);
  EXPECT_NEAR(c.lambda(1), 2.56, 1e-12);
  EXPECT_NEAR(c.q(0), -5.0, 1e-12);
  EXPECT_NEAR(c.q(1), 5.0, 1e-12);
  EXPECT_GT(c.alpha_upper(0), 0.0);
  EXPECT_LE(clearing_kkt_residual(s, b, c), 1e-8);
  const oracle::TwoBusClearing ref = oracle::two_bus_clearing(10.0, b, 5.0);
  EXPECT_LE((c.lambda - Eigen::VectorXd(ref.lambda)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Market, QuantityFormAgrees) {
  const Scenario s = generate_scenario(4, 9);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd b(9);
    for (int i = 0; i < 9; ++i) b(i) = s.a + u(rng);
    const ClearingOutcome c = clear_market(s, b);
    EXPECT_LE((clear_quantities(s, b) - c.q).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Market, RegulatedPriceBranches) {
  const Scenario s = two_prosumers(5.0);
  const Eigen::Vector2d p(105.0, 195.0);
  ClearingOutcome c = clear_market(s, Eigen::Vector2d(10.5, 30.6));
  // At the regulated equilibrium both arguments coincide.
  const Eigen::VectorXd lr = regulated_price(s, c, p);
  EXPECT_NEAR(lr(0), 1.55, 1e-12);
  EXPECT_NEAR(lr(1), 2.56, 1e-12);

  // Buyer whose market price sits below its marginal bound is lifted.
  const double bound = marginal_bound(s, 1, p(1), c.q(1));
  c.lambda(1) = bound - 1.0;
  EXPECT_NEAR(regulated_price(s, c, p)(1), bound, 1e-12);

  c.q(1) = 0.0;
  c.lambda(1) = 0.0;
  EXPECT_NEAR(regulated_price(s, c, p)(1), 2.0 * 0.006 * 195.0 + 0.72, 1e-12);
}

TEST(Market, PaymentsAndCosts) {
  const Scenario s = two_prosumers(5.0);
  const Eigen::Vector2d b(10.5, 30.6);
  EXPECT_NEAR(payment(s, b, 195.0, 1), 12.8, 1e-10);
  EXPECT_NEAR(payment(s, b, 105.0, 0), -7.75, 1e-10);
  EXPECT_NEAR(prosumer_cost(s, b, 1, CostMode::Regulated), 381.35, 1e-9);
  EXPECT_NEAR(prosumer_cost(s, b, 0, CostMode::Regulated), 69.425, 1e-9);
  EXPECT_NEAR(prosumer_cost(s, b, 0, CostMode::Unregulated), 77.175 - 7.75, 1e-9);
}

TEST(Market, NoTradeCostIsSelfSufficiency) {
  const Scenario s = two_prosumers(5.0);
  const Eigen::Vector2d b(20.0, 20.0);
  const ClearingOutcome c = clear_market(s, b);
  EXPECT_NEAR(c.q(0), 0.0, 1e-12);
  EXPECT_NEAR(payment(s, c, 100.0, 0), 0.0, 1e-12);
  EXPECT_NEAR(prosumer_cost(s, c, 0, CostMode::Regulated), disutility(s.prosumers[0], 100.0), 1e-9);
}

TEST(Market, ScenarioValidation) {
  auto code = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::UsageError;
  };
  const NetworkModel net = build_network(2, {{0, 1, 1.0}});
  EXPECT_EQ(code([&] { make_scenario(net, {{1.0, 0.0, 1.0, {}}}, 1.0); }), Errc::InvalidScenario);
  EXPECT_EQ(code([&] { make_scenario(net, {{1.0, 0, 1, {}}, {0.0, 0, 1, {}}}, 1.0); }), Errc::InvalidScenario);
  EXPECT_EQ(code([&] { make_scenario(net, {{1.0, 0, 1, {}}, {1.0, 0, 1, {}}}, 0.0); }), Errc::InvalidScenario);
  EXPECT_EQ(code([&] { make_scenario(net, {{1.0, 0, 1, Baseline{1, 1, 3}}, {1.0, 0, 1, {}}}, 1.0); }),
            Errc::InvalidScenario);
  EXPECT_EQ(code([&] { make_scenario(build_network(1, {}), {{1.0, 0, 1, {}}}, 1.0); }), Errc::TooFewProsumers);
  EXPECT_NO_THROW(make_scenario(net, {{1.0, 0, 1, Baseline{1, 2, 3}}, {1.0, 0, 1, {}}}, 1.0));
}

class MarketProperty : public ::testing::TestWithParam<int> {};

TEST_P(MarketProperty, ClearingInvariants) {
  const int seed = GetParam();
  const int n = 2 + seed % 19;
  const Scenario s = generate_scenario(seed, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Eigen::VectorXd D = s.D();

  for (int t = 0; t < 5; ++t) {
    // Bids around the zero-trade bids, spread enough to congest some lines.
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = s.a * (2.0 * s.prosumers[i].c * D(i) + s.prosumers[i].d) + 40.0 * noise(rng);
    const ClearingOutcome c = clear_market(s, b);

    EXPECT_LE(clearing_kkt_residual(s, b, c), 1e-8);
    EXPECT_LE(std::abs(c.q.sum()), 1e-8 * (1.0 + b.cwiseAbs().maxCoeff()));
    for (int l = 0; l < s.network.line_count(); ++l) {
      EXPECT_LE(std::abs(c.flows(l)), s.network.lines()[l].limit + 1e-8);
    }

    const bool congested = (c.alpha_lower.array() > 0.0).any() || (c.alpha_upper.array() > 0.0).any();
    if (!congested) {
      EXPECT_LE(c.lambda.maxCoeff() - c.lambda.minCoeff(), 1e-8);
      EXPECT_NEAR(c.lambda(0), b.sum() / (s.a * n), 1e-8);
      for (int i = 0; i < n; ++i) {
        const double gap = b(i) - b.mean();
        if (std::abs(gap) > 1e-9) EXPECT_EQ(c.q(i) > 0.0, gap > 0.0);
      }
    }

    // One-sided slopes of q_i in b_i, skipping breakpoints.
    const double h = 1e-4;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd up = b, down = b;
      up(i) += h;
      down(i) -= h;
      const double right = (clear_market(s, up).q(i) - c.q(i)) / h;
      const double left = (c.q(i) - clear_market(s, down).q(i)) / h;
      if (std::abs(right - left) > 1e-6) continue;
      EXPECT_GE(right, -1e-6);
      EXPECT_LE(right, (n - 1.0) / n + 1e-6);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, MarketProperty, ::testing::Range(1, 51));
