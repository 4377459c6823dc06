#include "nashseek/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace nashseek {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double min_symmetric_part_eigenvalue(const Matrix& s) {
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::optional<Matrix> solve_lyapunov(const Matrix& a, const Matrix& c) {
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  // Column-major vec: vec(X·A) = (Aᵀ ⊗ I) vec(X), vec(Aᵀ·X) = (I ⊗ Aᵀ) vec(X).
  const Matrix op = kron(a.transpose(), id) + kron(id, a.transpose());
  Eigen::FullPivLU<Matrix> lu(op);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector rhs = Eigen::Map<const Vector>(c.data(), c.size());
  const Vector sol = lu.solve(rhs);
  Matrix x = Eigen::Map<const Matrix>(sol.data(), n, n);
  return x;
}

double lyapunov_residual(const Matrix& x, const Matrix& a, const Matrix& c) {
  return (x * a + a.transpose() * x - c).norm();
}

bool is_symmetric_positive_definite(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Matrix> llt(sym);
  return llt.info() == Eigen::Success;
}

}  // namespace nashseek
