#include "nashseek/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nashseek/error.hpp"

namespace nashseek {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double fd_step(const Vector& x) { return 1e-6 * std::max(1.0, x.norm()); }

void require_size(const Vector& v, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(v.size()) != expected) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has length " +
                                                  std::to_string(v.size()) + ", expected " +
                                                  std::to_string(expected));
  }
}

}  // namespace

Game::Game(std::size_t n_players, std::size_t decision_dim, GradientOracle gradient,
           std::optional<CostOracle> cost)
    : n_players_(n_players), dim_(decision_dim), gradient_(std::move(gradient)), cost_(std::move(cost)) {
  if (n_players_ == 0 || dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "empty game");
  if (!gradient_) throw Error(ErrorCode::DimensionMismatch, "game needs a gradient oracle");
}

Vector Game::gradient(std::size_t player, const Vector& own, const Vector& others) const {
  require_size(own, dim_, "own decision");
  require_size(others, (n_players_ - 1) * dim_, "others' decisions");
  Vector g = gradient_(player, own, others);
  require_size(g, dim_, "gradient");
  return g;
}

double Game::cost(std::size_t player, const Vector& profile) const {
  if (!cost_) throw Error(ErrorCode::DimensionMismatch, "game has no cost oracle");
  require_size(profile, profile_size(), "profile");
  return (*cost_)(player, profile);
}

Vector others_of(const Vector& profile, std::size_t player, std::size_t dim) {
  const auto m = idx(dim);
  const auto i = idx(player);
  Vector out(profile.size() - m);
  out.head(i * m) = profile.head(i * m);
  out.tail(profile.size() - (i + 1) * m) = profile.tail(profile.size() - (i + 1) * m);
  return out;
}

Vector pseudo_gradient(const Game& game, const Vector& x) {
  require_size(x, game.profile_size(), "profile");
  const auto m = idx(game.dim());
  Vector f(x.size());
  for (std::size_t i = 0; i < game.players(); ++i) {
    f.segment(idx(i) * m, m) =
        game.gradient(i, x.segment(idx(i) * m, m), others_of(x, i, game.dim()));
  }
  return f;
}

Vector extended_pseudo_gradient(const Game& game, const Vector& x, const Vector& x_hat) {
  require_size(x, game.profile_size(), "profile");
  require_size(x_hat, game.players() * game.profile_size(), "estimate stack");
  const auto m = idx(game.dim());
  const auto row = idx(game.profile_size());
  Vector f(x.size());
  for (std::size_t i = 0; i < game.players(); ++i) {
    const Vector estimates = x_hat.segment(idx(i) * row, row);
    f.segment(idx(i) * m, m) =
        game.gradient(i, x.segment(idx(i) * m, m), others_of(estimates, i, game.dim()));
  }
  return f;
}

Matrix pseudo_gradient_jacobian(const Game& game, const Vector& x) {
  const double h = fd_step(x);
  Matrix jac(x.size(), x.size());
  Vector probe = x;
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    probe(c) = x(c) + h;
    const Vector plus = pseudo_gradient(game, probe);
    probe(c) = x(c) - h;
    const Vector minus = pseudo_gradient(game, probe);
    probe(c) = x(c);
    jac.col(c) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

namespace {

// Returns true on success; x is updated in place either way.
bool damped_newton(const Game& game, Vector& x, double tol, const NashSolveOptions& opts) {
  Vector f = pseudo_gradient(game, x);
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    if (inf_norm(f) <= tol) return true;
    Eigen::FullPivLU<Matrix> lu(pseudo_gradient_jacobian(game, x));
    if (!lu.isInvertible()) return false;
    const Vector dir = lu.solve(f);
    const double current = f.norm();
    double step = 1.0;
    bool accepted = false;
    for (std::size_t h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
      Vector trial = x - step * dir;
      Vector f_trial = pseudo_gradient(game, trial);
      if (f_trial.allFinite() && f_trial.norm() < current) {
        x = std::move(trial);
        f = std::move(f_trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) return inf_norm(f) <= tol;
  }
  return inf_norm(f) <= tol;
}

bool pseudo_gradient_flow(const Game& game, Vector& x, double tol, const NashSolveOptions& opts) {
  double step = opts.flow_step;
  Vector f = pseudo_gradient(game, x);
  for (std::size_t k = 0; k < opts.flow_max_steps; ++k) {
    if (inf_norm(f) <= tol) return true;
    Vector trial = x - step * f;
    Vector f_trial = pseudo_gradient(game, trial);
    if (!f_trial.allFinite() || f_trial.norm() > f.norm()) {
      step *= 0.5;
      if (step < 1e-12) return false;
      continue;
    }
    x = std::move(trial);
    f = std::move(f_trial);
  }
  return inf_norm(f) <= tol;
}

}  // namespace

Vector nash_solve(const Game& game, const Vector& x0, double tol, const NashSolveOptions& opts) {
  require_size(x0, game.profile_size(), "initial profile");
  Vector x = x0;
  if (damped_newton(game, x, tol, opts)) return x;
  if (pseudo_gradient_flow(game, x, tol, opts)) return x;
  throw Error(ErrorCode::NoConvergence,
              "pseudo-gradient residual " + std::to_string(inf_norm(pseudo_gradient(game, x))) +
                  " above tolerance; the game is probably not strongly monotone");
}

MonotonicityReport probe_monotonicity(const Game& game, std::mt19937_64& rng, std::size_t n_samples,
                                      ProbeBox box) {
  std::uniform_real_distribution<double> coord(box.lo, box.hi);
  const auto draw = [&](Eigen::Index len) {
    Vector v(len);
    for (Eigen::Index k = 0; k < len; ++k) v(k) = coord(rng);
    return v;
  };
  const auto len = idx(game.profile_size());
  const auto est_len = idx(game.players() * game.profile_size());

  MonotonicityReport report;
  report.omega_hat = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vector x = draw(len);
    const Vector y = draw(len);
    const double dist2 = (x - y).squaredNorm();
    if (dist2 > 0.0) {
      const Vector df = pseudo_gradient(game, x) - pseudo_gradient(game, y);
      report.omega_hat = std::min(report.omega_hat, (x - y).dot(df) / dist2);
      report.theta_hat = std::max(report.theta_hat, df.norm() / std::sqrt(dist2));
      ++report.samples;
    }
    const Vector xh = draw(est_len);
    const Vector yh = draw(est_len);
    const double est_dist = (xh - yh).norm();
    if (est_dist > 0.0) {
      const Vector de = extended_pseudo_gradient(game, x, xh) - extended_pseudo_gradient(game, x, yh);
      report.theta_hat_estimates = std::max(report.theta_hat_estimates, de.norm() / est_dist);
    }
  }
  if (report.samples == 0) report.omega_hat = 0.0;
  return report;
}

double gradient_fd_error(const Game& game, const Vector& x) {
  require_size(x, game.profile_size(), "profile");
  const double h = fd_step(x);
  const auto m = idx(game.dim());
  const Vector f = pseudo_gradient(game, x);
  double worst = 0.0;
  Vector probe = x;
  for (std::size_t i = 0; i < game.players(); ++i) {
    Vector fd(m);
    for (Eigen::Index c = 0; c < m; ++c) {
      const Eigen::Index k = idx(i) * m + c;
      probe(k) = x(k) + h;
      const double plus = game.cost(i, probe);
      probe(k) = x(k) - h;
      const double minus = game.cost(i, probe);
      probe(k) = x(k);
      fd(c) = (plus - minus) / (2.0 * h);
    }
    const Vector g = f.segment(idx(i) * m, m);
    worst = std::max(worst, inf_norm(g - fd) / std::max(1.0, inf_norm(g)));
  }
  return worst;
}

}  // namespace nashseek
