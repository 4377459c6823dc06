#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nashseek/error.hpp"
#include "nashseek/scenarios.hpp"

using namespace nashseek;

TEST(VehicleTable, RowsAndDensity) {
  const auto table = vehicle_table();
  ASSERT_EQ(table.size(), 10u);
  EXPECT_DOUBLE_EQ(table[0].mass, 1800);
  EXPECT_DOUBLE_EQ(table[0].frontal_area, 2.180);
  EXPECT_DOUBLE_EQ(table[2].drag_coeff, 1.052);
  EXPECT_DOUBLE_EQ(table[9].mech_drag, 5.038);
  EXPECT_DOUBLE_EQ(default_vehicle_params().air_density, 1.225);
}

TEST(VehiclePlant, HiddenParametersAndDrift) {
  const VehicleParams p = vehicle_table()[0];
  const Plant plant = vehicle_plant(p, 1.225);
  EXPECT_NEAR(plant.w(0), 1.225 * 2.180 * 1.526 / 3600.0, 1e-15);
  EXPECT_NEAR(plant.w(1), 6.412 / 1800.0, 1e-15);
  RowMatrix chain(2, 2);
  chain << 0.0, 0.0, 2.0, -3.0;
  const Vector f = plant.evaluate_drift(chain);
  EXPECT_NEAR(f(0), -plant.w(0) * 4.0 - plant.w(1), 1e-15);
  EXPECT_NEAR(f(1), plant.w(0) * 9.0 - plant.w(1), 1e-15);
}

TEST(StarFormation, Geometry) {
  const FormationSpec star = star_formation(10, 10.0, 10.0 * std::sin(std::numbers::pi / 10) /
                                                          std::sin(3 * std::numbers::pi / 10));
  EXPECT_NEAR(star.offsets(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(star.offsets(0, 1), 10.0, 1e-12);
  EXPECT_NEAR(star.offsets.row(1).norm(), 10.0 * std::sin(std::numbers::pi / 10) / std::sin(3 * std::numbers::pi / 10),
              1e-12);
  // The star is centred, so the equilibrium is the formation itself.
  EXPECT_LT(star.offsets.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(inf_norm(vehicle_nash_oracle(star) - Vector(Eigen::Map<const Vector>(
                                                     RowMatrix(star.offsets).data(), 20))),
            1e-12);
}

TEST(VehicleNash, TwoVehicleExample) {
  FormationSpec spec;
  spec.offsets.resize(2, 2);
  spec.offsets << 1.0, 0.0, 3.0, 0.0;
  const Vector p = vehicle_nash_oracle(spec);
  // Shift (Σ d)/(N+2) = (1, 0).
  EXPECT_DOUBLE_EQ(p(0), 0.0);
  EXPECT_DOUBLE_EQ(p(2), 2.0);
  EXPECT_LT(inf_norm(pseudo_gradient(vehicle_formation_game(spec), p)), 1e-15);
}

TEST(VehicleNash, DefaultScenarioResidual) {
  const VehicleScenario vs = build_vehicle_formation();
  EXPECT_EQ(vs.scenario.order_n, 2u);
  EXPECT_EQ(vs.scenario.plants.size(), 10u);
  EXPECT_LT(inf_norm(pseudo_gradient(vs.scenario.game, vs.scenario.nash)), 1e-12);
}

TEST(TurbineTable, RowsAndOracle) {
  const auto gens = generator_table();
  ASSERT_EQ(gens.size(), 6u);
  EXPECT_DOUBLE_EQ(gens[0].gamma2, 36.8);
  EXPECT_DOUBLE_EQ(gens[3].gamma2, 20.41);
  const Scenario s = build_turbine_market();
  EXPECT_EQ(s.order_n, 4u);
  EXPECT_LT(inf_norm(pseudo_gradient(s.game, s.nash)), 1e-9);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_GT(s.nash(i), 0.0);
  EXPECT_GT(s.omega_bound, 0.0);
}

TEST(TurbineValidation, RejectsNonPositiveQuadraticCost) {
  TurbineScenarioParams p = default_turbine_params();
  EXPECT_NO_THROW(validate(p));
  p.generators[2].gamma3 = 0.0;
  EXPECT_THROW(validate(p), Error);
}

TEST(VehicleValidation, RejectsNonPositiveMass) {
  VehicleScenarioParams p = default_vehicle_params();
  EXPECT_NO_THROW(validate(p));
  p.vehicles[4].mass = -1.0;
  EXPECT_THROW(validate(p), Error);
}
