#pragma once

// Gains and the two distributed seeking laws.
//
// Nothing in this header can see a plant's drift or its hidden parameters:
// the laws consume the player's own (measured) states, its gradient at its
// current estimates, and messages from in-neighbours. That is the whole
// interface; the model-free property is structural.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nashseek/linalg.hpp"

namespace nashseek {

class Digraph;

struct GainSet {
  std::size_t order_n = 1;
  /// k_1 … k_{n−1}, constant term of p(s) first; empty for n = 1.
  Vector k;
  double epsilon = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double alpha3 = 1.0;
};

struct ObserverSet {
  /// β_1 … β_n of s^n + β_1 s^{n−1} + … + β_n.
  Vector beta;
  double mu = 0.01;
};

/// Per-player controller state. Row j of x_hat is the estimate of player j's
/// decision (including the player's own row); row l of z_chain is the
/// observer's z^{(l)} and is empty in state-feedback mode.
struct SeekerState {
  Vector y;
  RowMatrix x_hat;
  RowMatrix z_chain;
};

/// What player i hears from in-neighbour k: a_ik, k's estimate matrix and
/// k's decision x_k.
struct NeighborMessage {
  std::size_t index;
  double weight;
  const RowMatrix& estimates;
  const Vector& decision;
};

struct StateFeedbackOutput {
  Vector u;
  Vector dy;
  RowMatrix dx_hat;
};

struct OutputFeedbackOutput {
  Vector u;
  Vector dy;
  RowMatrix dz_chain;
  RowMatrix dx_hat;
};

/// Coefficients of (s+1)^{n−1} below the leading one, constant term first.
[[nodiscard]] Vector default_hurwitz_gains(std::size_t n);
/// β_1 … β_n of (s+1)^n, i.e. C(n,1) … C(n,n).
[[nodiscard]] Vector default_observer_gains(std::size_t n);

/// (n−1)×(n−1) companion matrix of p(s): shifted identity on top, bottom row
/// −k_1 … −k_{n−1}. Throws Error(EmptyGains) for an empty k.
[[nodiscard]] Matrix companion_matrix(const Vector& k);

/// Routh test, leading coefficient first. Any zero in the first column is
/// treated as not stable, so imaginary-axis roots are rejected.
[[nodiscard]] bool routh_hurwitz_stable(std::span<const double> coeffs);

/// Monic coefficients of p(s), leading first: {1, k_{n−1}, …, k_1}.
[[nodiscard]] std::vector<double> characteristic_coefficients(const Vector& k);

/// P = Pᵀ > 0 with PA + AᵀP = −I. Throws Error(NotHurwitz).
[[nodiscard]] Matrix lyapunov_P(const Matrix& a);

/// Throws Error(ConfigInvalid) for non-positive parameters or wrong k length,
/// Error(NotHurwitz) when p(s) is not Hurwitz.
void validate(const GainSet& gains);
void validate(const ObserverSet& obs, std::size_t order_n);

struct GainOrderingReport {
  double eps_pow_n_minus_1 = 0.0;
  double eps_pow_n = 0.0;
  bool lower_ok = false;   // ε^{n−1} < α₂
  bool middle_ok = false;  // α₂ < α₁
  bool upper_ok = false;   // α₁ < ε^n
  std::string warning;     // empty when all three hold

  [[nodiscard]] bool passes() const { return lower_ok && middle_ok && upper_ok; }
};

/// Sufficient gain ordering ε^{n−1} < α₂ < α₁ < ε^n. Advisory only.
[[nodiscard]] GainOrderingReport check_gain_ordering(const GainSet& gains);

/// Estimate dynamics, identical for both laws:
///   d x̂_i^j = −α₃ ( Σ_k a_ik (x̂_i^j − x̂_k^j) + a_ij (x̂_i^j − x_j) ).
[[nodiscard]] RowMatrix estimate_dynamics(const RowMatrix& x_hat, std::span<const NeighborMessage> neighbors,
                                          double alpha3);

/// State-feedback law. plant_state rows are x_i, x_i^{(1)}, …, x_i^{(n−1)};
/// grad is ∇_{x_i}J_i at (x_i, x̂_{−i}).
[[nodiscard]] StateFeedbackOutput state_feedback_rhs(const RowMatrix& plant_state, const SeekerState& seeker,
                                                     const Vector& grad,
                                                     std::span<const NeighborMessage> neighbors,
                                                     const GainSet& gains);

/// Output-feedback law with a high-gain observer. Only the output x_i is
/// available; derivatives come from seeker.z_chain.
[[nodiscard]] OutputFeedbackOutput output_feedback_rhs(const Vector& output, const SeekerState& seeker,
                                                       const Vector& grad,
                                                       std::span<const NeighborMessage> neighbors,
                                                       const GainSet& gains, const ObserverSet& obs);

/// In-neighbour messages for player i given everyone's estimates and decisions.
[[nodiscard]] std::vector<NeighborMessage> gather_messages(const Digraph& g, std::size_t player,
                                                           std::span<const RowMatrix> estimates,
                                                           std::span<const Vector> decisions);

}  // namespace nashseek
