#pragma once

// Small dense linear-algebra helpers shared by the graph and control layers.
// Everything here works on matrices of at most a few hundred rows, so the
// routines favour directness (dense vectorization, full-pivot LU) over speed.

#include <Eigen/Dense>

#include <optional>

namespace nashseek {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Kronecker product a ⊗ b.
[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);

/// Smallest eigenvalue of (s + sᵀ)/2.
[[nodiscard]] double min_symmetric_part_eigenvalue(const Matrix& s);

/// Solves X·A + Aᵀ·X = C for X by vectorization,
///   (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(X) = vec(C).
/// Returns nullopt when the n²×n² system is numerically singular, which
/// happens exactly when A and −A share an eigenvalue.
[[nodiscard]] std::optional<Matrix> solve_lyapunov(const Matrix& a, const Matrix& c);

/// Frobenius norm of X·A + Aᵀ·X − C.
[[nodiscard]] double lyapunov_residual(const Matrix& x, const Matrix& a, const Matrix& c);

/// True when (m + mᵀ)/2 admits a Cholesky factorization.
[[nodiscard]] bool is_symmetric_positive_definite(const Matrix& m);

[[nodiscard]] inline double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace nashseek
