#include <gtest/gtest.h>

#include <random>

#include "nashseek/error.hpp"
#include "nashseek/game.hpp"
#include "nashseek/scenarios.hpp"

using namespace nashseek;

namespace {

// J_i = ½‖x_i‖², so F(x) = x.
Game identity_game(std::size_t n, std::size_t m) {
  return Game(
      n, m, [](std::size_t, const Vector& own, const Vector&) { return own; },
      [m](std::size_t i, const Vector& x) {
        return 0.5 * x.segment(static_cast<Eigen::Index>(i * m), static_cast<Eigen::Index>(m)).squaredNorm();
      });
}

// Two scalar players, J_i = ½x_i² + x_i·x_{−i}.
Game coupled_pair() {
  return Game(2, 1, [](std::size_t, const Vector& own, const Vector& others) {
    return Vector(own + others);
  });
}

}  // namespace

TEST(PseudoGradient, TurbineAtZero) {
  const Scenario s = build_turbine_market();
  const Vector f = pseudo_gradient(s.game, Vector::Zero(6));
  const auto gens = generator_table();
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(f(i), gens[static_cast<std::size_t>(i)].gamma2 - 200.0);
  EXPECT_NEAR(f(0), -163.2, 1e-12);
  EXPECT_NEAR(f(3), -179.59, 1e-12);
}

TEST(PseudoGradient, VehiclesAtZero) {
  const VehicleScenario vs = build_vehicle_formation();
  const Vector f = pseudo_gradient(vs.scenario.game, Vector::Zero(20));
  for (Eigen::Index i = 0; i < 10; ++i) {
    const Vector want = -2.0 * vs.formation.offsets.row(i).transpose() / 10.0;
    EXPECT_LT(inf_norm(f.segment(i * 2, 2) - want), 1e-15);
  }
}

TEST(PseudoGradient, IdentityGame) {
  const Vector x = Vector::LinSpaced(6, -2.0, 3.0);
  EXPECT_EQ(pseudo_gradient(identity_game(3, 2), x), x);
  EXPECT_THROW((void)pseudo_gradient(identity_game(3, 2), Vector::Zero(5)), Error);
}

TEST(ExtendedPseudoGradient, ConsistentEstimatesCollapse) {
  const Scenario s = build_turbine_market();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-50.0, 300.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(6);
    for (Eigen::Index k = 0; k < 6; ++k) x(k) = coord(rng);
    Vector x_hat(36);
    for (Eigen::Index i = 0; i < 6; ++i) x_hat.segment(i * 6, 6) = x;
    EXPECT_EQ(extended_pseudo_gradient(s.game, x, x_hat), pseudo_gradient(s.game, x));
  }
}

TEST(ExtendedPseudoGradient, UsesOwnEstimatesOfOthers) {
  Vector x(2);
  x << 1, 1;
  // Row-major: player 1's estimates (of 1, of 2), then player 2's.
  Vector x_hat(4);
  x_hat << 1, 0, 1, 1;
  EXPECT_DOUBLE_EQ(extended_pseudo_gradient(coupled_pair(), x, x_hat)(0), 1.0);
  EXPECT_DOUBLE_EQ(extended_pseudo_gradient(coupled_pair(), x, x_hat)(1), 2.0);
  EXPECT_THROW((void)extended_pseudo_gradient(coupled_pair(), x, Vector::Zero(3)), Error);
}

TEST(ExtendedPseudoGradient, TurbineZeroEstimatesAtZero) {
  const Scenario s = build_turbine_market();
  EXPECT_EQ(extended_pseudo_gradient(s.game, Vector::Zero(6), Vector::Zero(36)),
            pseudo_gradient(s.game, Vector::Zero(6)));
}

TEST(NashSolve, IdentityGameGoesToZero) {
  const Vector x = nash_solve(identity_game(4, 2), Vector::Constant(8, 3.0), 1e-12);
  EXPECT_LT(inf_norm(x), 1e-12);
}

TEST(NashSolve, MatchesVehicleClosedForm) {
  const VehicleScenario vs = build_vehicle_formation();
  const Vector x = nash_solve(vs.scenario.game, Vector::Zero(20), 1e-12);
  EXPECT_LT(inf_norm(x - vs.scenario.nash), 1e-8);
  EXPECT_LE(inf_norm(pseudo_gradient(vs.scenario.game, x)), 1e-12);
}

TEST(NashSolve, MatchesTurbineLinearSolve) {
  const Scenario s = build_turbine_market();
  const Vector x = nash_solve(s.game, Vector::Zero(6), 1e-11);
  EXPECT_LT(inf_norm(x - s.nash), 1e-8);
}

TEST(NashSolve, NonMonotoneGameDoesNotConverge) {
  // F(x) = x² + 1 has no real zero.
  const Game g(1, 1, [](std::size_t, const Vector& own, const Vector&) {
    return Vector(own.array().square() + 1.0);
  });
  NashSolveOptions opts;
  opts.flow_max_steps = 1000;
  EXPECT_THROW((void)nash_solve(g, Vector::Zero(1), 1e-10, opts), Error);
}

TEST(Monotonicity, IdentityGameIsOneOne) {
  std::mt19937_64 rng(1);
  const MonotonicityReport r = probe_monotonicity(identity_game(2, 2), rng, 500);
  EXPECT_NEAR(r.omega_hat, 1.0, 1e-12);
  EXPECT_NEAR(r.theta_hat, 1.0, 1e-12);
  EXPECT_EQ(r.samples, 500u);
}

TEST(Monotonicity, VehicleGameNearTwoOverN) {
  std::mt19937_64 rng(1);
  const MonotonicityReport r = probe_monotonicity(build_vehicle_formation().scenario.game, rng, 2000);
  EXPECT_NEAR(r.omega_hat, 0.2, 0.01);
  EXPECT_LE(r.omega_hat, r.theta_hat);
}

TEST(Monotonicity, TurbineGameAboveAnalyticBound) {
  std::mt19937_64 rng(1);
  const Scenario s = build_turbine_market();
  const MonotonicityReport r = probe_monotonicity(s.game, rng, 2000);
  EXPECT_GE(r.omega_hat, 0.3);
  EXPECT_LE(r.omega_hat, r.theta_hat);
  EXPECT_GT(r.theta_hat_estimates, 0.0);
}

TEST(Monotonicity, CorruptedCostIsDetected) {
  TurbineScenarioParams p = default_turbine_params();
  p.generators[0].gamma3 = -1.0;
  EXPECT_THROW(validate(p), Error);
  std::mt19937_64 rng(1);
  EXPECT_LT(probe_monotonicity(build_turbine_market(p).game, rng, 2000).omega_hat, 0.0);
}

TEST(GradientCheck, ScenariosMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  for (const Game& g : {build_vehicle_formation().scenario.game, build_turbine_market().game}) {
    for (int trial = 0; trial < 50; ++trial) {
      Vector x(static_cast<Eigen::Index>(g.profile_size()));
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = coord(rng);
      EXPECT_LE(gradient_fd_error(g, x), 1e-6);
    }
  }
}

TEST(GradientCheck, DetectsWrongGradient) {
  const Game wrong(
      2, 1, [](std::size_t, const Vector& own, const Vector&) { return Vector(2.0 * own); },
      [](std::size_t i, const Vector& x) { return 0.5 * x(static_cast<Eigen::Index>(i)) * x(static_cast<Eigen::Index>(i)); });
  Vector x(2);
  x << 3.0, -4.0;
  EXPECT_GT(gradient_fd_error(wrong, x), 0.1);
  EXPECT_THROW((void)gradient_fd_error(coupled_pair(), x), Error);
}
