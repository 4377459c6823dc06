#include "nashseek/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nashseek/error.hpp"

namespace nashseek {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

// ---------------------------------------------------------------------------
// Vehicle formation

std::vector<VehicleParams> vehicle_table() {
  return {
      {1800, 2.180, 1.526, 6.412}, {1775, 2.165, 1.649, 5.241}, {825, 1.634, 1.052, 2.466},
      {1025, 1.746, 1.281, 3.969}, {1200, 1.844, 1.359, 4.113}, {1450, 1.983, 1.420, 4.755},
      {970, 1.715, 1.138, 2.842},  {1500, 2.011, 1.409, 4.672}, {1320, 1.911, 1.389, 4.263},
      {1670, 2.107, 1.514, 5.038},
  };
}

VehicleScenarioParams default_vehicle_params() {
  VehicleScenarioParams p;
  p.vehicles = vehicle_table();
  return p;
}

FormationSpec star_formation(std::size_t n, double outer, double inner) {
  FormationSpec spec;
  spec.offsets.resize(idx(n), 2);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * static_cast<double>(k) /
                                                      static_cast<double>(n);
    const double r = k % 2 == 0 ? outer : inner;
    spec.offsets(idx(k), 0) = r * std::cos(theta);
    spec.offsets(idx(k), 1) = r * std::sin(theta);
  }
  return spec;
}

Game vehicle_formation_game(const FormationSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.offsets.rows());
  const double inv_n = 1.0 / static_cast<double>(n);
  RowMatrix anchors = spec.offsets;

  GradientOracle gradient = [anchors, inv_n](std::size_t i, const Vector& own, const Vector& others) {
    Vector others_sum = Vector::Zero(2);
    for (Eigen::Index k = 0; k < others.size(); k += 2) others_sum += others.segment(k, 2);
    return Vector(inv_n * (3.0 * own - 2.0 * anchors.row(idx(i)).transpose() + others_sum));
  };
  CostOracle cost = [anchors, inv_n, n](std::size_t i, const Vector& profile) {
    Vector total = Vector::Zero(2);
    for (std::size_t j = 0; j < n; ++j) total += profile.segment(idx(j) * 2, 2);
    const Vector own = profile.segment(idx(i) * 2, 2);
    return 0.5 * inv_n * (own - 2.0 * anchors.row(idx(i)).transpose()).squaredNorm() + inv_n * own.dot(total);
  };
  return Game(n, 2, std::move(gradient), std::move(cost));
}

Vector vehicle_nash_oracle(const FormationSpec& spec) {
  const auto n = spec.offsets.rows();
  const Eigen::RowVectorXd shift = spec.offsets.colwise().sum() / static_cast<double>(n + 2);
  Vector p(n * 2);
  for (Eigen::Index i = 0; i < n; ++i) p.segment(i * 2, 2) = (spec.offsets.row(i) - shift).transpose();
  return p;
}

Plant vehicle_plant(const VehicleParams& p, double air_density) {
  Vector w(2);
  w << air_density * p.frontal_area * p.drag_coeff / (2.0 * p.mass), p.mech_drag / p.mass;
  DriftFn drift = [](const RowMatrix& chain, const Vector& hidden) {
    const Vector v = chain.row(1).transpose();
    return Vector(-hidden(0) * v.cwiseProduct(v.cwiseAbs()) - Vector::Constant(v.size(), hidden(1)));
  };
  return Plant{2, 2, std::move(drift), std::move(w)};
}

void validate(const VehicleScenarioParams& params) {
  if (params.vehicles.size() < 2) throw Error(ErrorCode::ConfigInvalid, "need at least two vehicles");
  for (const auto& v : params.vehicles) {
    if (!(v.mass > 0 && v.frontal_area > 0 && v.drag_coeff > 0 && v.mech_drag > 0)) {
      throw Error(ErrorCode::ConfigInvalid, "vehicle parameters must be positive");
    }
  }
  if (!(params.air_density > 0 && params.outer_radius > 0 && params.inner_radius.value_or(1.0) > 0)) {
    throw Error(ErrorCode::ConfigInvalid, "air density and star radii must be positive");
  }
}

VehicleScenario build_vehicle_formation(const VehicleScenarioParams& params) {
  const std::size_t n = params.vehicles.size();
  const double inner = params.inner_radius.value_or(params.outer_radius * std::sin(std::numbers::pi / 10.0) /
                                                    std::sin(3.0 * std::numbers::pi / 10.0));
  FormationSpec formation = star_formation(n, params.outer_radius, inner);
  std::vector<Plant> plants;
  for (const auto& v : params.vehicles) plants.push_back(vehicle_plant(v, params.air_density));
  Digraph graph = params.graph.value_or(unbalanced_cycle(n));
  if (graph.size() != n) throw Error(ErrorCode::ConfigInvalid, "graph size does not match vehicle count");

  Scenario s{"vehicles",
             vehicle_formation_game(formation),
             std::move(plants),
             std::move(graph),
             2,
             vehicle_nash_oracle(formation),
             2.0 / static_cast<double>(n)};
  return VehicleScenario{std::move(s), std::move(formation)};
}

// ---------------------------------------------------------------------------
// Turbine-generator market

std::vector<GeneratorParams> generator_table() {
  return {
      {7, 36.80, 0.27}, {20, 13.73, 0.15}, {60, 17.14, 0.23},
      {15, 20.41, 0.10}, {10, 15.28, 0.18}, {55, 14.07, 0.32},
  };
}

TurbineScenarioParams default_turbine_params() {
  TurbineScenarioParams p;
  p.generators = generator_table();
  return p;
}

Digraph turbine_default_graph() {
  Matrix w = unbalanced_cycle(6).weights();
  w(0, 3) = 0.5;
  return Digraph(std::move(w));
}

Game turbine_market_game(const TurbineScenarioParams& params) {
  const auto gens = params.generators;
  const std::size_t n = gens.size();
  const double a = params.price_intercept;
  const double b = params.price_slope;

  GradientOracle gradient = [gens, a, b](std::size_t i, const Vector& own, const Vector& others) {
    const double p = own(0);
    const double total = p + others.sum();
    Vector g(1);
    g(0) = gens[i].gamma2 + 2.0 * gens[i].gamma3 * p - a + b * total + b * p;
    return g;
  };
  CostOracle cost = [gens, a, b](std::size_t i, const Vector& profile) {
    const double p = profile(idx(i));
    const double price = a - b * profile.sum();
    return gens[i].gamma1 + gens[i].gamma2 * p + gens[i].gamma3 * p * p - price * p;
  };
  return Game(n, 1, std::move(gradient), std::move(cost));
}

Vector turbine_nash_oracle(const TurbineScenarioParams& params) {
  const auto n = idx(params.generators.size());
  Matrix a = Matrix::Constant(n, n, params.price_slope);
  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& g = params.generators[static_cast<std::size_t>(i)];
    a(i, i) += 2.0 * g.gamma3 + params.price_slope;
    rhs(i) = params.price_intercept - g.gamma2;
  }
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularSystem, "market stationarity system is singular");
  return lu.solve(rhs);
}

void validate(const TurbineScenarioParams& params) {
  if (params.generators.size() < 2) throw Error(ErrorCode::ConfigInvalid, "need at least two generators");
  for (const auto& g : params.generators) {
    if (!(g.gamma3 > 0.0)) throw Error(ErrorCode::ConfigInvalid, "gamma3 must be positive");
  }
}

Scenario build_turbine_market(const TurbineScenarioParams& params) {
  const std::size_t n = params.generators.size();
  std::vector<Plant> plants(n, integrator_chain(4, 1));
  Digraph graph = params.graph.value_or(n == 6 ? turbine_default_graph() : unbalanced_cycle(n));
  if (graph.size() != n) throw Error(ErrorCode::ConfigInvalid, "graph size does not match generator count");
  double min_diag = std::numeric_limits<double>::infinity();
  for (const auto& g : params.generators) min_diag = std::min(min_diag, 2.0 * g.gamma3 + params.price_slope);
  return Scenario{"turbines",
                  turbine_market_game(params),
                  std::move(plants),
                  std::move(graph),
                  4,
                  turbine_nash_oracle(params),
                  min_diag};
}

}  // namespace nashseek
