#pragma once

// Fixed-step simulation of the stacked closed loop (plants + seeking laws +
// estimate consensus + optional observers) and the convergence metrics
// computed from its trajectories.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nashseek/control.hpp"
#include "nashseek/error.hpp"
#include "nashseek/game.hpp"
#include "nashseek/graph.hpp"
#include "nashseek/linalg.hpp"
#include "nashseek/plant.hpp"

namespace nashseek {

enum class Mode { StateBased, OutputBased };

[[nodiscard]] constexpr const char* to_string(Mode mode) noexcept {
  return mode == Mode::StateBased ? "state" : "output";
}

/// Abort threshold on any state magnitude.
inline constexpr double kDivergenceBound = 1e12;

struct SimConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  Mode mode = Mode::StateBased;
  std::size_t record_stride = 1;
  std::uint64_t seed = 1;
  /// Full-state dumps every this many records; 0 disables them.
  std::size_t snapshot_stride = 0;
  /// Clearing this skips the Hurwitz/positivity checks on the gains; it
  /// exists for degenerate test setups (e.g. all gains zero).
  bool validate_gains = true;
};

struct InitialConditions {
  /// Explicit x(0); when absent, drawn uniformly from [box_lo, box_hi] with
  /// the run seed.
  std::optional<Vector> decisions;
  double box_lo = -10.0;
  double box_hi = 10.0;
  /// Per-player (n−1)×m derivative rows x^{(1)}(0) … x^{(n−1)}(0); zero when absent.
  std::optional<std::vector<RowMatrix>> derivatives;
};

/// Offsets of each block inside the flat state vector:
/// [plant chains | y | estimate matrices | observer chains].
class StateLayout {
 public:
  StateLayout(std::size_t players, std::size_t order_n, std::size_t dim_m, bool observer);

  [[nodiscard]] std::size_t players() const noexcept { return n_players_; }
  [[nodiscard]] std::size_t order() const noexcept { return order_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] bool has_observer() const noexcept { return observer_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return size_; }

  [[nodiscard]] Eigen::Index plant(std::size_t i) const;
  [[nodiscard]] Eigen::Index aux(std::size_t i) const;
  [[nodiscard]] Eigen::Index estimates(std::size_t i) const;
  [[nodiscard]] Eigen::Index observer(std::size_t i) const;

 private:
  std::size_t n_players_;
  std::size_t order_;
  std::size_t dim_;
  bool observer_;
  Eigen::Index size_;
};

struct ClosedLoopState {
  std::vector<RowMatrix> plant;  // n×m chain per player
  std::vector<SeekerState> seekers;
  double t = 0.0;
};

/// The stacked closed loop as a pure right-hand side on a flat vector.
class ClosedLoop {
 public:
  ClosedLoop(Game game, std::vector<Plant> plants, Digraph graph, GainSet gains,
             std::optional<ObserverSet> observer, Mode mode);

  [[nodiscard]] const StateLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] Mode mode() const noexcept { return mode_; }

  [[nodiscard]] Vector rhs(const Vector& state, double t) const;

  [[nodiscard]] ClosedLoopState unpack(const Vector& state, double t = 0.0) const;
  [[nodiscard]] Vector pack(const ClosedLoopState& state) const;
  [[nodiscard]] Vector decisions(const Vector& state) const;

 private:
  Game game_;
  std::vector<Plant> plants_;
  Digraph graph_;
  GainSet gains_;
  std::optional<ObserverSet> observer_;
  Mode mode_;
  StateLayout layout_;
};

/// Classical fourth-order Runge–Kutta step. Throws Error(Diverged) when a
/// stage or the result is not finite.
template <class Rhs>
[[nodiscard]] Vector rk4_step(const Rhs& rhs, const Vector& x, double t, double dt) {
  const auto check = [](const Vector& v) {
    if (!v.allFinite()) throw Error(ErrorCode::Diverged, "non-finite value in RK4 stage");
  };
  const Vector k1 = rhs(x, t);
  check(k1);
  const Vector k2 = rhs(Vector(x + 0.5 * dt * k1), t + 0.5 * dt);
  check(k2);
  const Vector k3 = rhs(Vector(x + 0.5 * dt * k2), t + 0.5 * dt);
  check(k3);
  const Vector k4 = rhs(Vector(x + dt * k3), t + dt);
  check(k4);
  Vector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  check(next);
  return next;
}

struct Trajectory {
  std::size_t players = 0;
  std::size_t dim = 0;
  std::vector<double> times;
  std::vector<Vector> decisions;
  /// ‖x(t) − x*‖₂; empty when no reference equilibrium was supplied.
  std::vector<double> error_norms;
  /// ‖x̂ − 1_N ⊗ x‖_∞
  std::vector<double> estimate_disagreement;
  /// max_i ‖z_i − x_i‖_∞; output-feedback runs only.
  std::vector<double> observer_error;
  std::vector<std::pair<double, Vector>> snapshots;
};

/// Integrates the closed loop from the initial conditions over the horizon.
///
/// Throws Error(ConfigInvalid) for inconsistent dimensions or step sizes
/// (output mode requires dt ≤ μ/10), Error(NotStronglyConnected) when the
/// graph fails its certificate and Error(Diverged) when any state becomes
/// non-finite or exceeds kDivergenceBound in magnitude.
[[nodiscard]] Trajectory run(const Game& game, std::span<const Plant> plants, const Digraph& g,
                             const GainSet& gains, const std::optional<ObserverSet>& obs,
                             const SimConfig& cfg, const InitialConditions& init,
                             const std::optional<Vector>& x_star = std::nullopt);

/// Builds the equilibrium tuple (x*, 0, …, 0, y* = f*/α₂, x̂* = 1_N ⊗ x*) and, in
/// output mode, z* = (x*, 0, …, 0), then returns ‖closed-loop RHS‖_∞ there.
[[nodiscard]] double equilibrium_residual(const Game& game, std::span<const Plant> plants, const Digraph& g,
                                          const GainSet& gains, const Vector& x_star,
                                          Mode mode = Mode::StateBased,
                                          const std::optional<ObserverSet>& obs = std::nullopt);

struct RateFit {
  double lambda_hat = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares line through (t, log‖x(t) − x*‖) on [t_lo, t_hi]; λ̂ = −slope.
/// Throws Error(EmptyWindow) with fewer than two samples and
/// Error(NonPositiveError) when an error sample in the window is ≤ 0.
[[nodiscard]] RateFit fit_exponential_rate(const Trajectory& traj, double t_lo, double t_hi);

/// Window of the main decay in log space: from the peak error, the times at
/// which log error has covered lo_frac and hi_frac of the way down to the
/// final error. Throws Error(EmptyWindow) when the error never decays.
[[nodiscard]] std::pair<double, double> mid_decay_window(const Trajectory& traj, double lo_frac = 0.1,
                                                         double hi_frac = 0.9);

/// First recorded time after which ‖x(s) − x*‖_∞ ≤ tol_rel · max(1, ‖x*‖_∞)
/// holds through the end; nullopt when the final sample is outside.
[[nodiscard]] std::optional<double> settle_time(const Trajectory& traj, const Vector& x_star, double tol_rel);

/// Sup of the observer error over samples with t ≥ t_from.
[[nodiscard]] double max_observer_error_after(const Trajectory& traj, double t_from);

/// CSV with header t,x_1_1,…,x_N_m,err_norm,est_disagreement. Numbers are
/// printed with 17 significant digits so equal runs give equal bytes.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace nashseek
