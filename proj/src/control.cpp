#include "nashseek/control.hpp"

#include <cmath>
#include <sstream>

#include "nashseek/error.hpp"
#include "nashseek/graph.hpp"

namespace nashseek {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Binomial coefficients C(p, 0) … C(p, p).
std::vector<double> binomial_row(std::size_t p) {
  std::vector<double> row{1.0};
  for (std::size_t r = 1; r <= p; ++r) {
    row.push_back(row.back() * static_cast<double>(p - r + 1) / static_cast<double>(r));
  }
  return row;
}

void require_rows(const RowMatrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << what << " is " << m.rows() << "x" << m.cols() << ", expected " << rows << "x" << cols;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

void require_len(const Vector& v, Eigen::Index len, const char* what) {
  if (v.size() != len) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                    std::to_string(len));
  }
}

}  // namespace

Vector default_hurwitz_gains(std::size_t n) {
  if (n <= 1) return Vector(0);
  // (s+1)^{n−1}: coefficient of s^l is C(n−1, l), and k_{l+1} multiplies s^l.
  const auto row = binomial_row(n - 1);
  Vector k(idx(n - 1));
  for (std::size_t l = 0; l + 1 < n; ++l) k(idx(l)) = row[l];
  return k;
}

Vector default_observer_gains(std::size_t n) {
  const auto row = binomial_row(n);
  Vector beta(idx(n));
  for (std::size_t l = 1; l <= n; ++l) beta(idx(l - 1)) = row[l];
  return beta;
}

Matrix companion_matrix(const Vector& k) {
  if (k.size() == 0) throw Error(ErrorCode::EmptyGains, "companion matrix needs n >= 2");
  const Eigen::Index d = k.size();
  Matrix a = Matrix::Zero(d, d);
  a.topRightCorner(d - 1, d - 1) = Matrix::Identity(d - 1, d - 1);
  a.row(d - 1) = -k.transpose();
  return a;
}

std::vector<double> characteristic_coefficients(const Vector& k) {
  std::vector<double> c{1.0};
  for (Eigen::Index l = k.size() - 1; l >= 0; --l) c.push_back(k(l));
  return c;
}

bool routh_hurwitz_stable(std::span<const double> coeffs) {
  if (coeffs.empty() || coeffs.front() == 0.0) return false;
  const std::size_t degree = coeffs.size() - 1;
  if (degree == 0) return true;
  const double sign = coeffs.front() > 0.0 ? 1.0 : -1.0;

  const std::size_t width = degree / 2 + 1;
  std::vector<double> upper(width, 0.0);
  std::vector<double> lower(width, 0.0);
  for (std::size_t i = 0; i <= degree; ++i) {
    (i % 2 == 0 ? upper : lower)[i / 2] = sign * coeffs[i];
  }
  if (!(upper[0] > 0.0)) return false;
  for (std::size_t row = 1; row <= degree; ++row) {
    if (!(lower[0] > 0.0)) return false;
    std::vector<double> next(width, 0.0);
    for (std::size_t j = 0; j + 1 < width; ++j) {
      next[j] = (lower[0] * upper[j + 1] - upper[0] * lower[j + 1]) / lower[0];
    }
    upper = std::move(lower);
    lower = std::move(next);
  }
  return true;
}

Matrix lyapunov_P(const Matrix& a) {
  const Eigen::Index n = a.rows();
  const auto p = solve_lyapunov(a, -Matrix::Identity(n, n));
  if (!p) throw Error(ErrorCode::NotHurwitz, "Lyapunov system PA + A'P = -I is singular");
  Matrix sym = 0.5 * (*p + p->transpose());
  if (!is_symmetric_positive_definite(sym)) {
    throw Error(ErrorCode::NotHurwitz, "solution of PA + A'P = -I is not positive definite");
  }
  return sym;
}

void validate(const GainSet& gains) {
  if (gains.order_n < 1) throw Error(ErrorCode::ConfigInvalid, "plant order must be >= 1");
  if (static_cast<std::size_t>(gains.k.size()) != gains.order_n - 1) {
    throw Error(ErrorCode::ConfigInvalid, "k must have n-1 = " + std::to_string(gains.order_n - 1) +
                                              " entries, got " + std::to_string(gains.k.size()));
  }
  if (!(gains.epsilon > 0.0 && gains.alpha1 > 0.0 && gains.alpha2 > 0.0 && gains.alpha3 > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "epsilon and alpha1..alpha3 must be positive");
  }
  const auto coeffs = characteristic_coefficients(gains.k);
  if (!routh_hurwitz_stable(coeffs)) {
    throw Error(ErrorCode::NotHurwitz, "p(s) built from k has roots outside the open left half plane");
  }
}

void validate(const ObserverSet& obs, std::size_t order_n) {
  if (static_cast<std::size_t>(obs.beta.size()) != order_n) {
    throw Error(ErrorCode::ConfigInvalid, "beta must have n = " + std::to_string(order_n) + " entries");
  }
  if (!(obs.mu > 0.0)) throw Error(ErrorCode::ConfigInvalid, "mu must be positive");
  std::vector<double> coeffs{1.0};
  for (Eigen::Index l = 0; l < obs.beta.size(); ++l) coeffs.push_back(obs.beta(l));
  if (!routh_hurwitz_stable(coeffs)) {
    throw Error(ErrorCode::NotHurwitz, "observer polynomial from beta is not Hurwitz");
  }
}

GainOrderingReport check_gain_ordering(const GainSet& gains) {
  GainOrderingReport r;
  const double n = static_cast<double>(gains.order_n);
  r.eps_pow_n_minus_1 = std::pow(gains.epsilon, n - 1.0);
  r.eps_pow_n = std::pow(gains.epsilon, n);
  r.lower_ok = r.eps_pow_n_minus_1 < gains.alpha2;
  r.middle_ok = gains.alpha2 < gains.alpha1;
  r.upper_ok = gains.alpha1 < r.eps_pow_n;
  if (!r.passes()) {
    std::ostringstream os;
    os << "gain ordering eps^(n-1) < alpha2 < alpha1 < eps^n violated (" << r.eps_pow_n_minus_1
       << (r.lower_ok ? " < " : " >= ") << gains.alpha2 << (r.middle_ok ? " < " : " >= ") << gains.alpha1
       << (r.upper_ok ? " < " : " >= ") << r.eps_pow_n
       << "); the condition is only sufficient, continuing";
    r.warning = os.str();
  }
  return r;
}

RowMatrix estimate_dynamics(const RowMatrix& x_hat, std::span<const NeighborMessage> neighbors,
                            double alpha3) {
  RowMatrix d = RowMatrix::Zero(x_hat.rows(), x_hat.cols());
  for (const NeighborMessage& msg : neighbors) {
    require_rows(msg.estimates, x_hat.rows(), x_hat.cols(), "neighbour estimates");
    require_len(msg.decision, x_hat.cols(), "neighbour decision");
    if (msg.index >= static_cast<std::size_t>(x_hat.rows())) {
      throw Error(ErrorCode::DimensionMismatch, "neighbour index out of range");
    }
    d.noalias() -= msg.weight * (x_hat - msg.estimates);
    const auto j = idx(msg.index);
    d.row(j) -= msg.weight * (x_hat.row(j) - msg.decision.transpose());
  }
  return alpha3 * d;
}

StateFeedbackOutput state_feedback_rhs(const RowMatrix& plant_state, const SeekerState& seeker,
                                       const Vector& grad, std::span<const NeighborMessage> neighbors,
                                       const GainSet& gains) {
  const auto n = idx(gains.order_n);
  const auto m = grad.size();
  require_rows(plant_state, n, m, "plant state");
  require_len(seeker.y, m, "auxiliary state y");
  if (seeker.x_hat.cols() != m) throw Error(ErrorCode::DimensionMismatch, "estimate width != m");

  StateFeedbackOutput out;
  const double eps_top = std::pow(gains.epsilon, static_cast<double>(n - 1));
  out.u = -gains.alpha1 * grad - gains.alpha2 * seeker.y;
  out.dy = (gains.alpha1 / eps_top) * grad;
  for (Eigen::Index l = 1; l < n; ++l) {
    const double kl = gains.k(l - 1);
    out.u -= std::pow(gains.epsilon, static_cast<double>(n - l)) * kl * plant_state.row(l).transpose();
    out.dy += std::pow(gains.epsilon, static_cast<double>(1 - l)) * kl * plant_state.row(l).transpose();
  }
  out.dx_hat = estimate_dynamics(seeker.x_hat, neighbors, gains.alpha3);
  return out;
}

OutputFeedbackOutput output_feedback_rhs(const Vector& output, const SeekerState& seeker, const Vector& grad,
                                         std::span<const NeighborMessage> neighbors, const GainSet& gains,
                                         const ObserverSet& obs) {
  const auto n = idx(gains.order_n);
  const auto m = grad.size();
  require_len(output, m, "output");
  require_len(seeker.y, m, "auxiliary state y");
  require_rows(seeker.z_chain, n, m, "observer chain");
  require_len(obs.beta, n, "observer beta");
  if (seeker.x_hat.cols() != m) throw Error(ErrorCode::DimensionMismatch, "estimate width != m");

  OutputFeedbackOutput out;
  const double eps_top = std::pow(gains.epsilon, static_cast<double>(n - 1));
  out.u = -gains.alpha1 * grad - gains.alpha2 * seeker.y;
  out.dy = (gains.alpha1 / eps_top) * grad;
  for (Eigen::Index l = 1; l < n; ++l) {
    const double kl = gains.k(l - 1);
    out.u -= std::pow(gains.epsilon, static_cast<double>(n - l)) * kl * seeker.z_chain.row(l).transpose();
    out.dy += std::pow(gains.epsilon, static_cast<double>(1 - l)) * kl * seeker.z_chain.row(l).transpose();
  }

  const Eigen::RowVectorXd innovation = output.transpose() - seeker.z_chain.row(0);
  out.dz_chain.resize(n, m);
  for (Eigen::Index l = 1; l <= n; ++l) {
    const double gain = std::pow(gains.epsilon / obs.mu, static_cast<double>(l)) * obs.beta(l - 1);
    out.dz_chain.row(l - 1) = gain * innovation;
    if (l < n) out.dz_chain.row(l - 1) += seeker.z_chain.row(l);
  }
  out.dx_hat = estimate_dynamics(seeker.x_hat, neighbors, gains.alpha3);
  return out;
}

std::vector<NeighborMessage> gather_messages(const Digraph& g, std::size_t player,
                                             std::span<const RowMatrix> estimates,
                                             std::span<const Vector> decisions) {
  std::vector<NeighborMessage> out;
  out.reserve(g.in_neighbors(player).size());
  for (std::size_t k : g.in_neighbors(player)) {
    out.push_back(NeighborMessage{k, g.weight(player, k), estimates[k], decisions[k]});
  }
  return out;
}

}  // namespace nashseek
