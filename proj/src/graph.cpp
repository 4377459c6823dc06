#include "nashseek/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

#include <Eigen/Eigenvalues>

#include "nashseek/error.hpp"

namespace nashseek {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

Digraph::Digraph(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols() || weights_.rows() == 0) {
    throw Error(ErrorCode::InvalidGraph, "weight matrix must be square and non-empty");
  }
  const std::size_t n = size();
  in_neighbors_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights_(idx(i), idx(j));
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(ErrorCode::InvalidGraph, "weights must be finite and nonnegative");
      }
      if (i == j && w != 0.0) {
        throw Error(ErrorCode::InvalidGraph, "self loop at node " + std::to_string(i + 1));
      }
      if (w > 0.0) in_neighbors_[i].push_back(j);
    }
  }
}

Digraph Digraph::from_edges(std::size_t n, std::span<const Edge> edges) {
  if (n == 0) throw Error(ErrorCode::InvalidGraph, "graph needs at least one node");
  Matrix w = Matrix::Zero(idx(n), idx(n));
  for (const Edge& e : edges) {
    if (e.to >= n || e.from >= n) throw Error(ErrorCode::InvalidGraph, "edge endpoint out of range");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::InvalidGraph, "edge weights must be positive");
    }
    if (w(idx(e.to), idx(e.from)) != 0.0) {
      throw Error(ErrorCode::InvalidGraph, "duplicate edge (" + std::to_string(e.to + 1) + "," +
                                               std::to_string(e.from + 1) + ")");
    }
    w(idx(e.to), idx(e.from)) = e.weight;
  }
  return Digraph(std::move(w));
}

std::vector<Edge> Digraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j : in_neighbors_[i]) out.push_back({i, j, weight(i, j)});
  }
  return out;
}

Matrix laplacian(const Digraph& g) {
  const Eigen::Index n = g.weights().rows();
  Matrix l = -g.weights();
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) off += l(i, j);
    }
    l(i, i) = -off;
  }
  return l;
}

Vector laplacian_row_sums(const Matrix& l) {
  Vector sums(l.rows());
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < l.cols(); ++j) {
      if (j != i) off += l(i, j);
    }
    sums(i) = off + l(i, i);
  }
  return sums;
}

bool is_strongly_connected(const Digraph& g) {
  using BoostGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  BoostGraph bg(g.size());
  // Information flows from j to i along (i, j).
  for (const Edge& e : g.edges()) boost::add_edge(e.from, e.to, bg);
  std::vector<int> component(g.size());
  const int count = boost::strong_components(
      bg, boost::make_iterator_property_map(component.begin(), boost::get(boost::vertex_index, bg)));
  return count == 1;
}

bool is_weight_balanced(const Digraph& g) {
  return ((g.in_degrees() - g.out_degrees()).cwiseAbs().array() <= kWeightBalanceTol).all();
}

EstimationBlocks estimation_block_matrix(const Digraph& g) {
  const Eigen::Index n = g.weights().rows();
  EstimationBlocks out;
  out.l_ext = kron(laplacian(g), Matrix::Identity(n, n));
  out.m = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out.m(i * n + j, i * n + j) = g.weights()(i, j);
  }
  return out;
}

GraphCertificate lemma1_certificate(const Digraph& g) {
  GraphCertificate cert;
  cert.laplacian = laplacian(g);
  cert.strongly_connected = is_strongly_connected(g);
  cert.weight_balanced = is_weight_balanced(g);

  const auto blocks = estimation_block_matrix(g);
  const Matrix s = blocks.l_ext + blocks.m;
  cert.lemma1_min_eig = min_symmetric_part_eigenvalue(s);

  const Eigen::Index n = g.weights().rows();
  // The block decomposition is a similarity, so the spectrum of S is the
  // union of the block spectra.
  cert.min_real_eigenvalue = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix block = cert.laplacian;
    block.diagonal() += g.weights().col(j);
    const Eigen::EigenSolver<Matrix> es(block, false);
    cert.min_real_eigenvalue = std::min(cert.min_real_eigenvalue, es.eigenvalues().real().minCoeff());
  }

  Matrix q = Matrix::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix block = cert.laplacian;
    block.diagonal() += g.weights().col(j);
    const auto qj = solve_lyapunov(block, Matrix::Identity(n, n));
    if (!qj) {
      if (cert.strongly_connected) {
        throw Error(ErrorCode::SingularLyapunov,
                    "Lyapunov system for estimated player " + std::to_string(j + 1) + " is singular");
      }
      return cert;
    }
    // Stacked position of (owner i, estimated player j) is i·n + j.
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) q(a * n + j, b * n + j) = (*qj)(a, b);
    }
  }
  cert.lyapunov_residual = lyapunov_residual(q, s, Matrix::Identity(n * n, n * n));
  cert.lyapunov_Q_positive_definite = is_symmetric_positive_definite(q);
  cert.lyapunov_Q = std::move(q);
  return cert;
}

Digraph unbalanced_cycle(std::size_t n) {
  std::vector<Edge> edges;
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      edges.push_back({i, (i + 1) % n, 1.0 + 0.1 * static_cast<double>(i)});
    }
  }
  return Digraph::from_edges(n, edges);
}

Digraph random_strongly_connected_digraph(std::size_t n, std::mt19937_64& rng, double extra_edge_prob) {
  if (n == 0) throw Error(ErrorCode::InvalidGraph, "graph needs at least one node");
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Matrix w = Matrix::Zero(idx(n), idx(n));
  if (n > 1) {
    for (std::size_t k = 0; k < n; ++k) w(idx(order[k]), idx(order[(k + 1) % n])) = weight(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && w(idx(i), idx(j)) == 0.0 && coin(rng) < extra_edge_prob) w(idx(i), idx(j)) = weight(rng);
    }
  }
  return Digraph(std::move(w));
}

}  // namespace nashseek
