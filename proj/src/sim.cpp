#include "nashseek/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <random>

namespace nashseek {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

Vector flatten(const RowMatrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

}  // namespace

// ---------------------------------------------------------------------------
// StateLayout

StateLayout::StateLayout(std::size_t players, std::size_t order_n, std::size_t dim_m, bool observer)
    : n_players_(players), order_(order_n), dim_(dim_m), observer_(observer) {
  const auto n = idx(players), o = idx(order_n), m = idx(dim_m);
  size_ = n * o * m + n * m + n * n * m + (observer ? n * o * m : 0);
}

Eigen::Index StateLayout::plant(std::size_t i) const { return idx(i * order_ * dim_); }

Eigen::Index StateLayout::aux(std::size_t i) const {
  return idx(n_players_ * order_ * dim_ + i * dim_);
}

Eigen::Index StateLayout::estimates(std::size_t i) const {
  return idx(n_players_ * order_ * dim_ + n_players_ * dim_ + i * n_players_ * dim_);
}

Eigen::Index StateLayout::observer(std::size_t i) const {
  return idx(n_players_ * order_ * dim_ + n_players_ * dim_ + n_players_ * n_players_ * dim_ +
             i * order_ * dim_);
}

// ---------------------------------------------------------------------------
// ClosedLoop

ClosedLoop::ClosedLoop(Game game, std::vector<Plant> plants, Digraph graph, GainSet gains,
                       std::optional<ObserverSet> observer, Mode mode)
    : game_(std::move(game)),
      plants_(std::move(plants)),
      graph_(std::move(graph)),
      gains_(std::move(gains)),
      observer_(std::move(observer)),
      mode_(mode),
      layout_(game_.players(), gains_.order_n, game_.dim(), mode == Mode::OutputBased) {
  const std::size_t n_players = game_.players();
  if (plants_.size() != n_players || graph_.size() != n_players) {
    throw Error(ErrorCode::ConfigInvalid, "game, plants and graph disagree on the number of players");
  }
  for (const Plant& p : plants_) {
    if (p.order_n != gains_.order_n || p.dim_m != game_.dim()) {
      throw Error(ErrorCode::ConfigInvalid, "plant order/dimension does not match gains/game");
    }
  }
  if (static_cast<std::size_t>(gains_.k.size()) + 1 != gains_.order_n) {
    throw Error(ErrorCode::ConfigInvalid, "k must have n-1 entries");
  }
  if (mode_ == Mode::OutputBased) {
    if (!observer_) throw Error(ErrorCode::ConfigInvalid, "output mode needs an observer");
    if (static_cast<std::size_t>(observer_->beta.size()) != gains_.order_n) {
      throw Error(ErrorCode::ConfigInvalid, "beta must have n entries");
    }
  }
}

ClosedLoopState ClosedLoop::unpack(const Vector& s, double t) const {
  if (s.size() != layout_.size()) throw Error(ErrorCode::DimensionMismatch, "state vector size");
  const auto n = idx(layout_.order()), m = idx(layout_.dim()), np = idx(layout_.players());
  ClosedLoopState st;
  st.t = t;
  st.plant.reserve(layout_.players());
  st.seekers.reserve(layout_.players());
  for (std::size_t i = 0; i < layout_.players(); ++i) {
    st.plant.emplace_back(ConstMap(s.data() + layout_.plant(i), n, m));
    SeekerState seeker;
    seeker.y = s.segment(layout_.aux(i), m);
    seeker.x_hat = ConstMap(s.data() + layout_.estimates(i), np, m);
    if (layout_.has_observer()) seeker.z_chain = ConstMap(s.data() + layout_.observer(i), n, m);
    st.seekers.push_back(std::move(seeker));
  }
  return st;
}

Vector ClosedLoop::pack(const ClosedLoopState& st) const {
  const auto n = idx(layout_.order()), m = idx(layout_.dim()), np = idx(layout_.players());
  if (st.plant.size() != layout_.players() || st.seekers.size() != layout_.players()) {
    throw Error(ErrorCode::DimensionMismatch, "closed-loop state has wrong player count");
  }
  Vector s(layout_.size());
  for (std::size_t i = 0; i < layout_.players(); ++i) {
    const SeekerState& seeker = st.seekers[i];
    if (st.plant[i].rows() != n || st.plant[i].cols() != m || seeker.y.size() != m ||
        seeker.x_hat.rows() != np || seeker.x_hat.cols() != m) {
      throw Error(ErrorCode::DimensionMismatch, "closed-loop block has wrong shape");
    }
    MutMap(s.data() + layout_.plant(i), n, m) = st.plant[i];
    s.segment(layout_.aux(i), m) = seeker.y;
    MutMap(s.data() + layout_.estimates(i), np, m) = seeker.x_hat;
    if (layout_.has_observer()) {
      if (seeker.z_chain.rows() != n || seeker.z_chain.cols() != m) {
        throw Error(ErrorCode::DimensionMismatch, "observer chain has wrong shape");
      }
      MutMap(s.data() + layout_.observer(i), n, m) = seeker.z_chain;
    }
  }
  return s;
}

Vector ClosedLoop::decisions(const Vector& s) const {
  const auto m = idx(layout_.dim());
  Vector x(idx(layout_.players()) * m);
  for (std::size_t i = 0; i < layout_.players(); ++i) {
    x.segment(idx(i) * m, m) = s.segment(layout_.plant(i), m);
  }
  return x;
}

Vector ClosedLoop::rhs(const Vector& s, double t) const {
  const ClosedLoopState st = unpack(s, t);
  const std::size_t np = layout_.players();
  const auto n = idx(layout_.order()), m = idx(layout_.dim());

  std::vector<Vector> decisions(np);
  std::vector<RowMatrix> estimates(np);
  for (std::size_t i = 0; i < np; ++i) {
    decisions[i] = st.plant[i].row(0).transpose();
    estimates[i] = st.seekers[i].x_hat;
  }

  Vector ds(layout_.size());
  for (std::size_t i = 0; i < np; ++i) {
    const Vector grad =
        game_.gradient(i, decisions[i], others_of(flatten(estimates[i]), i, layout_.dim()));
    const auto messages = gather_messages(graph_, i, estimates, decisions);

    MutMap dchain(ds.data() + layout_.plant(i), n, m);
    const RowMatrix& chain = st.plant[i];
    if (n > 1) dchain.topRows(n - 1) = chain.bottomRows(n - 1);
    const Vector drift = plants_[i].evaluate_drift(chain);

    if (mode_ == Mode::StateBased) {
      const auto out = state_feedback_rhs(chain, st.seekers[i], grad, messages, gains_);
      dchain.row(n - 1) = (drift + out.u).transpose();
      ds.segment(layout_.aux(i), m) = out.dy;
      MutMap(ds.data() + layout_.estimates(i), idx(np), m) = out.dx_hat;
    } else {
      const auto out = output_feedback_rhs(decisions[i], st.seekers[i], grad, messages, gains_, *observer_);
      dchain.row(n - 1) = (drift + out.u).transpose();
      ds.segment(layout_.aux(i), m) = out.dy;
      MutMap(ds.data() + layout_.estimates(i), idx(np), m) = out.dx_hat;
      MutMap(ds.data() + layout_.observer(i), n, m) = out.dz_chain;
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// run

namespace {

void validate_config(const Game& game, std::span<const Plant> plants, const Digraph& g, const GainSet& gains,
                     const std::optional<ObserverSet>& obs, const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.horizon >= cfg.dt)) {
    throw Error(ErrorCode::ConfigInvalid, "need dt > 0 and horizon >= dt");
  }
  if (cfg.record_stride == 0) throw Error(ErrorCode::ConfigInvalid, "record_stride must be >= 1");
  if (plants.size() != game.players() || g.size() != game.players()) {
    throw Error(ErrorCode::ConfigInvalid, "game, plants and graph disagree on the number of players");
  }
  if (cfg.validate_gains) validate(gains);
  if (cfg.mode == Mode::OutputBased) {
    if (!obs) throw Error(ErrorCode::ConfigInvalid, "output-based runs need an observer block");
    if (cfg.validate_gains) validate(*obs, gains.order_n);
    if (cfg.dt > obs->mu / 10.0 * (1.0 + 1e-12)) {
      throw Error(ErrorCode::ConfigInvalid, "output-based runs need dt <= mu/10");
    }
  }
  if (!is_strongly_connected(g)) {
    throw Error(ErrorCode::NotStronglyConnected, "communication graph is not strongly connected");
  }
}

Vector initial_decisions(const Game& game, const SimConfig& cfg, const InitialConditions& init) {
  if (init.decisions) {
    if (static_cast<std::size_t>(init.decisions->size()) != game.profile_size()) {
      throw Error(ErrorCode::ConfigInvalid, "initial decisions have the wrong length");
    }
    return *init.decisions;
  }
  if (!(init.box_lo <= init.box_hi)) throw Error(ErrorCode::ConfigInvalid, "initial box is empty");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coord(init.box_lo, init.box_hi);
  Vector x(idx(game.profile_size()));
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = coord(rng);
  return x;
}

}  // namespace

Trajectory run(const Game& game, std::span<const Plant> plants, const Digraph& g, const GainSet& gains,
               const std::optional<ObserverSet>& obs, const SimConfig& cfg, const InitialConditions& init,
               const std::optional<Vector>& x_star) {
  validate_config(game, plants, g, gains, obs, cfg);
  const ClosedLoop loop(game, std::vector<Plant>(plants.begin(), plants.end()), g, gains,
                        cfg.mode == Mode::OutputBased ? obs : std::nullopt, cfg.mode);
  const StateLayout& layout = loop.layout();
  const std::size_t np = layout.players();
  const auto n = idx(layout.order()), m = idx(layout.dim());
  if (x_star && static_cast<std::size_t>(x_star->size()) != game.profile_size()) {
    throw Error(ErrorCode::ConfigInvalid, "reference equilibrium has the wrong length");
  }

  // Initial state: y = 0, x̂ = 0, derivatives zero unless overridden, observer
  // position on the measured output.
  const Vector x0 = initial_decisions(game, cfg, init);
  ClosedLoopState st0;
  for (std::size_t i = 0; i < np; ++i) {
    RowMatrix chain = RowMatrix::Zero(n, m);
    chain.row(0) = x0.segment(idx(i) * m, m).transpose();
    if (init.derivatives) {
      if (init.derivatives->size() != np) throw Error(ErrorCode::ConfigInvalid, "derivative override count");
      const RowMatrix& d = (*init.derivatives)[i];
      if (d.rows() != n - 1 || d.cols() != m) throw Error(ErrorCode::ConfigInvalid, "derivative override shape");
      if (n > 1) chain.bottomRows(n - 1) = d;
    }
    SeekerState seeker;
    seeker.y = Vector::Zero(m);
    seeker.x_hat = RowMatrix::Zero(idx(np), m);
    if (cfg.mode == Mode::OutputBased) {
      seeker.z_chain = RowMatrix::Zero(n, m);
      seeker.z_chain.row(0) = chain.row(0);
    }
    st0.plant.push_back(std::move(chain));
    st0.seekers.push_back(std::move(seeker));
  }
  Vector state = loop.pack(st0);

  Trajectory traj;
  traj.players = np;
  traj.dim = layout.dim();
  std::size_t records = 0;
  const auto record = [&](double t, const Vector& s) {
    const Vector x = loop.decisions(s);
    traj.times.push_back(t);
    traj.decisions.push_back(x);
    if (x_star) traj.error_norms.push_back((x - *x_star).norm());
    double disagreement = 0.0;
    double obs_err = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
      const ConstMap est(s.data() + layout.estimates(i), idx(np), m);
      const ConstMap truth(x.data(), idx(np), m);
      disagreement = std::max(disagreement, (est - truth).cwiseAbs().maxCoeff());
      if (layout.has_observer()) {
        const auto z = s.segment(layout.observer(i), m);
        obs_err = std::max(obs_err, (z - x.segment(idx(i) * m, m)).cwiseAbs().maxCoeff());
      }
    }
    traj.estimate_disagreement.push_back(disagreement);
    if (layout.has_observer()) traj.observer_error.push_back(obs_err);
    if (cfg.snapshot_stride > 0 && records % cfg.snapshot_stride == 0) traj.snapshots.emplace_back(t, s);
    ++records;
  };

  const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  const auto rhs = [&loop](const Vector& s, double t) { return loop.rhs(s, t); };
  record(0.0, state);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * cfg.dt;
    state = rk4_step(rhs, state, t_prev, cfg.dt);
    if (state.cwiseAbs().maxCoeff() > kDivergenceBound) {
      throw Error(ErrorCode::Diverged, "state magnitude exceeded 1e12 at t = " +
                                           std::to_string(static_cast<double>(k) * cfg.dt));
    }
    if (k % cfg.record_stride == 0 || k == steps) record(static_cast<double>(k) * cfg.dt, state);
  }
  return traj;
}

double equilibrium_residual(const Game& game, std::span<const Plant> plants, const Digraph& g,
                            const GainSet& gains, const Vector& x_star, Mode mode,
                            const std::optional<ObserverSet>& obs) {
  const ClosedLoop loop(game, std::vector<Plant>(plants.begin(), plants.end()), g, gains,
                        mode == Mode::OutputBased ? obs : std::nullopt, mode);
  const std::size_t np = game.players();
  const auto n = idx(gains.order_n), m = idx(game.dim());
  if (static_cast<std::size_t>(x_star.size()) != game.profile_size()) {
    throw Error(ErrorCode::DimensionMismatch, "x_star has the wrong length");
  }
  RowMatrix consensus(idx(np), m);
  for (std::size_t j = 0; j < np; ++j) consensus.row(idx(j)) = x_star.segment(idx(j) * m, m).transpose();

  ClosedLoopState st;
  for (std::size_t i = 0; i < np; ++i) {
    RowMatrix chain = RowMatrix::Zero(n, m);
    chain.row(0) = consensus.row(idx(i));
    SeekerState seeker;
    seeker.y = plants[i].evaluate_drift(chain) / gains.alpha2;
    seeker.x_hat = consensus;
    if (mode == Mode::OutputBased) seeker.z_chain = chain;
    st.plant.push_back(std::move(chain));
    st.seekers.push_back(std::move(seeker));
  }
  return inf_norm(loop.rhs(loop.pack(st), 0.0));
}

// ---------------------------------------------------------------------------
// Metrics

RateFit fit_exponential_rate(const Trajectory& traj, double t_lo, double t_hi) {
  if (traj.error_norms.size() != traj.times.size()) {
    throw Error(ErrorCode::EmptyWindow, "trajectory has no error norms");
  }
  std::vector<double> ts, ys;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    if (t < t_lo || t > t_hi) continue;
    const double e = traj.error_norms[k];
    if (!(e > 0.0)) throw Error(ErrorCode::NonPositiveError, "zero error inside the fit window");
    ts.push_back(t);
    ys.push_back(std::log(e));
  }
  if (ts.size() < 2) throw Error(ErrorCode::EmptyWindow, "fewer than two samples in the fit window");

  const double count = static_cast<double>(ts.size());
  double t_mean = 0.0, y_mean = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    t_mean += ts[k];
    y_mean += ys[k];
  }
  t_mean /= count;
  y_mean /= count;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - t_mean) * (ts[k] - t_mean);
    sty += (ts[k] - t_mean) * (ys[k] - y_mean);
    syy += (ys[k] - y_mean) * (ys[k] - y_mean);
  }
  if (stt <= 0.0) throw Error(ErrorCode::EmptyWindow, "fit window has zero time span");
  const double slope = sty / stt;
  const double intercept = y_mean - slope * t_mean;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double r = ys[k] - (intercept + slope * ts[k]);
    ss_res += r * r;
  }
  RateFit fit;
  fit.lambda_hat = -slope;
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.samples = ts.size();
  return fit;
}

std::pair<double, double> mid_decay_window(const Trajectory& traj, double lo_frac, double hi_frac) {
  const auto& e = traj.error_norms;
  if (e.empty() || e.size() != traj.times.size()) throw Error(ErrorCode::EmptyWindow, "no error norms");
  const auto peak_it = std::max_element(e.begin(), e.end());
  const auto peak = static_cast<std::size_t>(peak_it - e.begin());
  // Floor the target so the window stays clear of round-off plateaus.
  const double floor = std::max(*std::min_element(peak_it, e.end()), 1e-10 * *peak_it);
  if (!(*peak_it > floor)) throw Error(ErrorCode::EmptyWindow, "error never decays");
  const double log_peak = std::log(*peak_it);
  const double drop = log_peak - std::log(floor);
  const auto first_below = [&](double frac) {
    const double level = log_peak - frac * drop;
    for (std::size_t k = peak; k < e.size(); ++k) {
      if (e[k] > 0.0 && std::log(e[k]) <= level) return traj.times[k];
    }
    return traj.times.back();
  };
  return {first_below(lo_frac), first_below(hi_frac)};
}

std::optional<double> settle_time(const Trajectory& traj, const Vector& x_star, double tol_rel) {
  if (traj.decisions.empty()) return std::nullopt;
  const double threshold = tol_rel * std::max(1.0, inf_norm(x_star));
  for (std::size_t k = traj.decisions.size(); k-- > 0;) {
    if (inf_norm(traj.decisions[k] - x_star) > threshold) {
      if (k + 1 == traj.decisions.size()) return std::nullopt;
      return traj.times[k + 1];
    }
  }
  return traj.times.front();
}

double max_observer_error_after(const Trajectory& traj, double t_from) {
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.observer_error.size() && k < traj.times.size(); ++k) {
    if (traj.times[k] >= t_from) worst = std::max(worst, traj.observer_error[k]);
  }
  return worst;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (std::size_t i = 1; i <= traj.players; ++i) {
    for (std::size_t c = 1; c <= traj.dim; ++c) os << ",x_" << i << '_' << c;
  }
  os << ",err_norm,est_disagreement\n";
  char buf[40];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    put(traj.times[k]);
    for (Eigen::Index c = 0; c < traj.decisions[k].size(); ++c) {
      os << ',';
      put(traj.decisions[k](c));
    }
    os << ',';
    if (k < traj.error_norms.size()) put(traj.error_norms[k]);
    else os << "nan";
    os << ',';
    put(traj.estimate_disagreement[k]);
    os << '\n';
  }
}

}  // namespace nashseek
