#pragma once

// The two case studies: a ten-vehicle formation game with quadratic-drag
// second-order plants, and a six-generator electricity market with
// fourth-order integrator plants.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nashseek/game.hpp"
#include "nashseek/graph.hpp"
#include "nashseek/linalg.hpp"
#include "nashseek/plant.hpp"

namespace nashseek {

struct Scenario {
  std::string name;
  Game game;
  std::vector<Plant> plants;
  Digraph graph;
  std::size_t order_n;
  /// Closed-form / direct-solve equilibrium.
  Vector nash;
  /// Analytic lower bound on the strong-monotonicity constant.
  double omega_bound;
};

// ---------------------------------------------------------------------------
// Vehicle formation

struct VehicleParams {
  double mass;          // kg
  double frontal_area;  // m²
  double drag_coeff;
  double mech_drag;     // N
};

/// Formation anchors d_i, one row per vehicle (N×2).
struct FormationSpec {
  RowMatrix offsets;
};

struct VehicleScenarioParams {
  std::vector<VehicleParams> vehicles;
  double air_density = 1.225;  // kg/m³
  double outer_radius = 10.0;
  /// Defaults to outer·sin(π/10)/sin(3π/10), the regular five-pointed star.
  std::optional<double> inner_radius;
  std::optional<Digraph> graph;
};

[[nodiscard]] std::vector<VehicleParams> vehicle_table();
[[nodiscard]] VehicleScenarioParams default_vehicle_params();

/// d_k = r_k (cos θ_k, sin θ_k), θ_k = π/2 + 2πk/N, r_k alternating outer
/// (even k) and inner (odd k).
[[nodiscard]] FormationSpec star_formation(std::size_t n, double outer, double inner);

/// J_i = (1/2N)‖p_i − 2d_i‖² + (1/N) p_iᵀ Σ_j p_j.
[[nodiscard]] Game vehicle_formation_game(const FormationSpec& spec);

/// p_i* = d_i − (Σ_j d_j)/(N+2), stacked.
[[nodiscard]] Vector vehicle_nash_oracle(const FormationSpec& spec);

/// Drift −(ρ A C_d / 2m) v ⊙ |v| − d_m/m. The hidden parameter vector is
/// w = (ρ A C_d / 2m, d_m/m).
[[nodiscard]] Plant vehicle_plant(const VehicleParams& p, double air_density);

struct VehicleScenario {
  Scenario scenario;
  FormationSpec formation;
};
[[nodiscard]] VehicleScenario build_vehicle_formation(const VehicleScenarioParams& params = default_vehicle_params());

// ---------------------------------------------------------------------------
// Turbine-generator market

struct GeneratorParams {
  double gamma1;  // $
  double gamma2;  // $/MW
  double gamma3;  // $/MW²
};

struct TurbineScenarioParams {
  std::vector<GeneratorParams> generators;
  /// Price p(σ) = intercept − slope · N σ with σ the mean output.
  double price_intercept = 200.0;
  double price_slope = 0.1;
  std::optional<Digraph> graph;
};

[[nodiscard]] std::vector<GeneratorParams> generator_table();
[[nodiscard]] TurbineScenarioParams default_turbine_params();

/// The default six-node network: unbalanced_cycle(6) plus node 1 receiving
/// from node 4 with weight 0.5 (1-based).
[[nodiscard]] Digraph turbine_default_graph();

/// J_i = γ_i1 + γ_i2 P_i + γ_i3 P_i² − p(σ) P_i.
[[nodiscard]] Game turbine_market_game(const TurbineScenarioParams& params);

/// Solves (diag(2γ_i3 + slope) + slope·11ᵀ) P = intercept − γ_i2 directly.
/// Throws Error(SingularSystem) if the matrix is singular.
[[nodiscard]] Vector turbine_nash_oracle(const TurbineScenarioParams& params = default_turbine_params());

/// Throws Error(ConfigInvalid) unless every γ_i3 > 0.
void validate(const TurbineScenarioParams& params);
/// Throws Error(ConfigInvalid) unless every vehicle parameter is positive.
void validate(const VehicleScenarioParams& params);

[[nodiscard]] Scenario build_turbine_market(const TurbineScenarioParams& params = default_turbine_params());

}  // namespace nashseek
