#pragma once

// Weighted communication digraphs.
//
// Convention: weights(i, j) = a_ij > 0 means node i RECEIVES from node j.
// Indices are 0-based in code; the JSON format (see config.hpp) is 1-based.

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "nashseek/linalg.hpp"

namespace nashseek {

struct Edge {
  std::size_t to;
  std::size_t from;
  double weight;
};

class Digraph {
 public:
  /// Throws Error(InvalidGraph) on a non-square, negative, non-finite or
  /// self-looped weight matrix.
  explicit Digraph(Matrix weights);

  /// Throws Error(InvalidGraph) for out-of-range indices, self loops,
  /// non-positive weights or duplicated edges.
  static Digraph from_edges(std::size_t n, std::span<const Edge> edges);

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }
  [[nodiscard]] double weight(std::size_t to, std::size_t from) const {
    return weights_(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from));
  }
  [[nodiscard]] const std::vector<std::size_t>& in_neighbors(std::size_t i) const { return in_neighbors_[i]; }
  [[nodiscard]] std::vector<Edge> edges() const;

  /// d_in^i = Σ_j a_ij
  [[nodiscard]] Vector in_degrees() const { return weights_.rowwise().sum(); }
  /// d_out^i = Σ_j a_ji
  [[nodiscard]] Vector out_degrees() const { return weights_.colwise().sum().transpose(); }

 private:
  Matrix weights_;
  std::vector<std::vector<std::size_t>> in_neighbors_;
};

/// L = D_in − A, with each diagonal entry formed as the negated sum of the
/// off-diagonal row so that every row sums to zero bitwise.
[[nodiscard]] Matrix laplacian(const Digraph& g);

/// Row sums of a Laplacian accumulated the way it is built (off-diagonal
/// entries first, then the diagonal); exactly zero for laplacian(g).
[[nodiscard]] Vector laplacian_row_sums(const Matrix& l);

[[nodiscard]] bool is_strongly_connected(const Digraph& g);

/// d_in^i == d_out^i for every node, within this absolute tolerance.
inline constexpr double kWeightBalanceTol = 1e-12;
[[nodiscard]] bool is_weight_balanced(const Digraph& g);

/// The two N²×N² matrices of the stacked estimate dynamics: L_ext = L ⊗ I_N
/// and M = diag{M_1, …, M_N} with M_i = diag{a_i1, …, a_iN}.
struct EstimationBlocks {
  Matrix l_ext;
  Matrix m;
};
[[nodiscard]] EstimationBlocks estimation_block_matrix(const Digraph& g);

struct GraphCertificate {
  Matrix laplacian;
  bool strongly_connected = false;
  bool weight_balanced = false;
  /// Smallest eigenvalue of the symmetric part of S = L_ext + M, i.e. the
  /// quadratic-form margin min xᵀSx/‖x‖². On weight-unbalanced digraphs this
  /// can be negative even when the graph is strongly connected.
  double lemma1_min_eig = 0.0;
  /// Smallest real part over the eigenvalues of S (positive stability).
  double min_real_eigenvalue = 0.0;
  /// Q with Q·S + Sᵀ·Q = I; absent when the block system is singular.
  std::optional<Matrix> lyapunov_Q;
  double lyapunov_residual = 0.0;
  bool lyapunov_Q_positive_definite = false;

  /// xᵀSx > 0 for every x ≠ 0.
  [[nodiscard]] bool symmetric_part_positive() const { return lemma1_min_eig > 0.0; }

  /// What the estimate dynamics need: strong connectivity, a spectrum of S in
  /// the open right half plane, and a positive definite Lyapunov matrix Q
  /// solving the equation to within 1e−8.
  [[nodiscard]] bool passes() const {
    return strongly_connected && min_real_eigenvalue > 0.0 && lyapunov_Q.has_value() &&
           lyapunov_Q_positive_definite && lyapunov_residual < 1e-8;
  }
};

/// Positive-definiteness and Lyapunov certificates for L_ext + M.
///
/// The N⁴-unknown Lyapunov system is never formed: ordering the stacked
/// estimate vector by estimated player instead of by owner turns L_ext + M
/// into blockdiag_j(L + D_j) with D_j = diag(a_1j, …, a_Nj), so Q is the
/// permuted block-diagonal assembly of N independent N×N solutions. The
/// residual, eigenvalue and Cholesky checks are done on the full matrices.
///
/// Throws Error(SingularLyapunov) if a strongly connected graph still yields a
/// singular block system (the single-node graph is the only such case).
[[nodiscard]] GraphCertificate lemma1_certificate(const Digraph& g);

/// Directed cycle where node i receives from node (i + 1) mod n with weight
/// 1 + 0.1·i. Strongly connected and, for n ≥ 2, weight-unbalanced.
[[nodiscard]] Digraph unbalanced_cycle(std::size_t n);

/// Random strongly connected digraph: a randomly ordered Hamiltonian cycle
/// plus each remaining ordered pair with probability extra_edge_prob, all
/// weights uniform in [0.1, 2].
[[nodiscard]] Digraph random_strongly_connected_digraph(std::size_t n, std::mt19937_64& rng,
                                                        double extra_edge_prob = 0.3);

}  // namespace nashseek
