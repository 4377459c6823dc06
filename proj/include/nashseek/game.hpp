#pragma once

// Noncooperative games given as per-player gradient oracles.
//
// A profile x stacks the N players' m-dimensional decisions: x = col(x_1, …, x_N).
// The extended profile x̂ used by the seeking laws stacks each player's estimate
// matrix row by row: x̂ = col(x̂_1, …, x̂_N) with x̂_i = col(x̂_i^1, …, x̂_i^N), where
// x̂_i^j is player i's estimate of player j.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "nashseek/linalg.hpp"

namespace nashseek {

/// ∇_{x_i} J_i(x_i, x_{−i}); x_minus_i stacks the other players in index order.
using GradientOracle =
    std::function<Vector(std::size_t player, const Vector& own, const Vector& others)>;
/// J_i evaluated on the full profile.
using CostOracle = std::function<double(std::size_t player, const Vector& profile)>;

class Game {
 public:
  Game(std::size_t n_players, std::size_t decision_dim, GradientOracle gradient,
       std::optional<CostOracle> cost = std::nullopt);

  [[nodiscard]] std::size_t players() const noexcept { return n_players_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t profile_size() const noexcept { return n_players_ * dim_; }
  [[nodiscard]] bool has_cost() const noexcept { return cost_.has_value(); }

  /// Player i's gradient at its own decision and some view of the others.
  [[nodiscard]] Vector gradient(std::size_t player, const Vector& own, const Vector& others) const;
  [[nodiscard]] double cost(std::size_t player, const Vector& profile) const;

 private:
  std::size_t n_players_;
  std::size_t dim_;
  GradientOracle gradient_;
  std::optional<CostOracle> cost_;
};

/// x_{−i}: the profile with player i's block removed.
[[nodiscard]] Vector others_of(const Vector& profile, std::size_t player, std::size_t dim);

/// F(x) = col(∇_{x_1}J_1(x_1, x_{−1}), …, ∇_{x_N}J_N(x_N, x_{−N})).
[[nodiscard]] Vector pseudo_gradient(const Game& game, const Vector& x);

/// F(x, x̂): player i's gradient at its own x_i and its estimates x̂_{−i}.
[[nodiscard]] Vector extended_pseudo_gradient(const Game& game, const Vector& x, const Vector& x_hat);

struct NashSolveOptions {
  std::size_t max_iterations = 200;
  std::size_t max_halvings = 40;
  /// Fallback pseudo-gradient flow ẋ = −F(x) (forward Euler) when Newton stalls.
  double flow_step = 1e-2;
  std::size_t flow_max_steps = 2'000'000;
};

/// Zero of the pseudo-gradient via damped Newton with a central-difference
/// Jacobian. Throws Error(NoConvergence) when neither Newton nor the fallback
/// flow reaches ‖F‖_∞ ≤ tol.
[[nodiscard]] Vector nash_solve(const Game& game, const Vector& x0, double tol,
                                const NashSolveOptions& opts = {});

/// Central-difference Jacobian of F with step 1e−6·max(1, ‖x‖).
[[nodiscard]] Matrix pseudo_gradient_jacobian(const Game& game, const Vector& x);

struct MonotonicityReport {
  /// min over sampled pairs of (x−y)ᵀ(F(x)−F(y)) / ‖x−y‖²
  double omega_hat = 0.0;
  /// max over sampled pairs of ‖F(x)−F(y)‖ / ‖x−y‖
  double theta_hat = 0.0;
  /// max over sampled pairs of ‖F(x, x̂)−F(x, ŷ)‖ / ‖x̂−ŷ‖
  double theta_hat_estimates = 0.0;
  std::size_t samples = 0;
};

struct ProbeBox {
  double lo = -10.0;
  double hi = 10.0;
};

/// Empirical strong-monotonicity / Lipschitz constants from uniformly sampled
/// point pairs in the box. Coincident pairs are skipped.
[[nodiscard]] MonotonicityReport probe_monotonicity(const Game& game, std::mt19937_64& rng,
                                                    std::size_t n_samples, ProbeBox box = {});

/// Largest relative deviation between the gradient oracle and central
/// differences of the cost oracle at one profile, over all players. The
/// deviation is ‖g − g_fd‖_∞ / max(1, ‖g‖_∞). Requires a cost oracle.
[[nodiscard]] double gradient_fd_error(const Game& game, const Vector& x);

}  // namespace nashseek
