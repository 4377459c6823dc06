#include "nashseek/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "nashseek/control.hpp"
#include "nashseek/error.hpp"
#include "nashseek/game.hpp"
#include "nashseek/graph.hpp"
#include "nashseek/sim.hpp"

namespace nashseek {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

struct RunMetrics {
  std::optional<double> settle_time;
  std::optional<double> lambda_hat;
  std::optional<double> r_squared;
  std::optional<double> observer_error;
  double final_residual = 0.0;
  double final_error = 0.0;
  double final_disagreement = 0.0;
};

RunMetrics measure(const ResolvedRun& r, const Trajectory& traj) {
  RunMetrics m;
  const Vector& x_final = traj.decisions.back();
  m.settle_time = settle_time(traj, r.scenario.nash, r.settle_tol);
  m.final_residual = inf_norm(pseudo_gradient(r.scenario.game, x_final));
  m.final_error = inf_norm(x_final - r.scenario.nash);
  m.final_disagreement = traj.estimate_disagreement.back();
  try {
    const auto [lo, hi] = mid_decay_window(traj);
    const RateFit fit = fit_exponential_rate(traj, lo, hi);
    m.lambda_hat = fit.lambda_hat;
    m.r_squared = fit.r_squared;
  } catch (const Error&) {
    // No decay to fit (e.g. started at the equilibrium or diverging).
  }
  if (!traj.observer_error.empty() && traj.times.back() >= kObserverTransient) {
    m.observer_error = max_observer_error_after(traj, kObserverTransient);
  }
  return m;
}

Json ordering_warnings(const GainSet& gains) {
  Json warnings = Json::array();
  const GainOrderingReport report = check_gain_ordering(gains);
  if (!report.passes()) warnings.push_back(report.warning);
  return warnings;
}

std::string fmt_optional(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(10) << *v;
  return os.str();
}

// ---------------------------------------------------------------------------
// verify

class CheckReport {
 public:
  explicit CheckReport(std::ostream& out) : out_(out) {}

  void record(const std::string& group, const std::string& name, bool ok, const std::string& detail) {
    ++total_;
    if (!ok) ++failed_;
    out_ << (ok ? "[PASS] " : "[FAIL] ") << group << "/" << name << ": " << detail << "\n";
  }

  /// Runs a check body; an exception counts as a failure with its message.
  void guarded(const std::string& group, const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(group, name, false, std::string("threw: ") + e.what());
    }
  }

  [[nodiscard]] std::size_t total() const { return total_; }
  [[nodiscard]] std::size_t failed() const { return failed_; }

 private:
  std::ostream& out_;
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

void verify_graph(CheckReport& rep, std::uint64_t seed) {
  rep.guarded("graph", "random_certificates", [&] {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(2, 8);
    double worst_eig = INFINITY;
    double worst_spectral = INFINITY;
    double worst_residual = 0.0;
    double worst_row_sum = 0.0;
    bool all_pass = true;
    for (int trial = 0; trial < 100; ++trial) {
      const Digraph g = random_strongly_connected_digraph(size(rng), rng);
      const GraphCertificate c = lemma1_certificate(g);
      all_pass = all_pass && c.passes();
      worst_eig = std::min(worst_eig, c.lemma1_min_eig);
      worst_spectral = std::min(worst_spectral, c.min_real_eigenvalue);
      worst_residual = std::max(worst_residual, c.lyapunov_residual);
      worst_row_sum = std::max(worst_row_sum, laplacian_row_sums(c.laplacian).cwiseAbs().maxCoeff());
    }
    rep.record("graph", "random_certificates", all_pass,
               "100 digraphs, min Re λ(L⊗I+M) " + num(worst_spectral) + ", max Lyapunov residual " +
                   num(worst_residual) + " (symmetric-part min eigenvalue " + num(worst_eig) + ")");
    rep.record("graph", "laplacian_row_sums", worst_row_sum == 0.0, "max |row sum| " + num(worst_row_sum));
  });
  rep.guarded("graph", "scenario_graphs", [&] {
    const Digraph vehicles = unbalanced_cycle(10);
    const Digraph turbines = turbine_default_graph();
    const bool ok = lemma1_certificate(vehicles).passes() && lemma1_certificate(turbines).passes() &&
                    !is_weight_balanced(vehicles) && !is_weight_balanced(turbines);
    rep.record("graph", "scenario_graphs", ok, "both default graphs strongly connected and weight-unbalanced");
  });
  rep.guarded("graph", "rejects_disconnected", [&] {
    Matrix w = Matrix::Zero(3, 3);
    w(1, 0) = 1.0;
    w(2, 1) = 1.0;
    const GraphCertificate c = lemma1_certificate(Digraph(w));
    rep.record("graph", "rejects_disconnected", !c.strongly_connected && !c.passes(), "directed path 1→2→3");
  });
}

void verify_control(CheckReport& rep, const Json& vehicles_doc, const Json& turbines_doc) {
  rep.guarded("control", "lyapunov_P", [&] {
    double worst = 0.0;
    bool spd = true;
    for (std::size_t n = 2; n <= 8; ++n) {
      const Matrix a = companion_matrix(default_hurwitz_gains(n));
      const Matrix p = lyapunov_P(a);
      const Matrix id = Matrix::Identity(a.rows(), a.cols());
      worst = std::max(worst, (p * a + a.transpose() * p + id).norm());
      spd = spd && is_symmetric_positive_definite(p) && (p - p.transpose()).cwiseAbs().maxCoeff() < 1e-12;
    }
    rep.record("control", "lyapunov_P", spd && worst < 1e-10, "n = 2..8, max residual " + num(worst));
  });
  rep.guarded("control", "default_gains_hurwitz", [&] {
    bool ok = true;
    for (std::size_t n = 2; n <= 8; ++n) {
      ok = ok && routh_hurwitz_stable(characteristic_coefficients(default_hurwitz_gains(n)));
      const Vector beta = default_observer_gains(n);
      std::vector<double> coeffs{1.0};
      for (Eigen::Index l = 0; l < beta.size(); ++l) coeffs.push_back(beta(l));
      ok = ok && routh_hurwitz_stable(coeffs);
    }
    rep.record("control", "default_gains_hurwitz", ok, "controller and observer polynomials, n = 2..8");
  });
  rep.guarded("control", "scenario_gain_ordering", [&] {
    const GainOrderingReport v = check_gain_ordering(gains_from(vehicles_doc, 2));
    const GainOrderingReport t = check_gain_ordering(gains_from(turbines_doc, 4));
    rep.record("control", "scenario_gain_ordering", v.passes() && t.passes(),
               v.passes() && t.passes() ? "default gain sets satisfy ε^{n−1} < α₂ < α₁ < ε^n"
                                        : v.warning + " " + t.warning);
  });
}

void verify_game(CheckReport& rep, const std::vector<std::pair<std::string, const Scenario*>>& scenarios,
                 std::uint64_t seed) {
  for (const auto& [name, s] : scenarios) {
    rep.guarded("game", name + "_gradient_fd", [&] {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> coord(-10.0, 10.0);
      double worst = 0.0;
      for (int trial = 0; trial < 50; ++trial) {
        Vector x(static_cast<Eigen::Index>(s->game.profile_size()));
        for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = coord(rng);
        worst = std::max(worst, gradient_fd_error(s->game, x));
      }
      rep.record("game", name + "_gradient_fd", worst <= 1e-6, "50 points, max relative error " + num(worst));
    });
    rep.guarded("game", name + "_monotonicity", [&] {
      std::mt19937_64 rng(seed);
      const MonotonicityReport m = probe_monotonicity(s->game, rng, 2000);
      bool ok = m.omega_hat > 0.0 && m.omega_hat >= s->omega_bound * (1.0 - 1e-9);
      if (name == "vehicles") ok = ok && std::abs(m.omega_hat - 0.2) <= 0.05 * 0.2;
      rep.record("game", name + "_monotonicity", ok,
                 "omega_hat " + num(m.omega_hat) + " vs analytic bound " + num(s->omega_bound) +
                     (ok ? "" : " — pseudo-gradient is not strongly monotone as required"));
    });
    rep.guarded("game", name + "_nash_oracle", [&] {
      const double oracle_residual = inf_norm(pseudo_gradient(s->game, s->nash));
      const Vector solved = nash_solve(s->game, Vector::Zero(s->nash.size()), 1e-11);
      const double gap = inf_norm(solved - s->nash);
      rep.record("game", name + "_nash_oracle", oracle_residual < 1e-9 && gap < 1e-8,
                 "‖F(x*)‖ " + num(oracle_residual) + ", oracle vs solver gap " + num(gap));
    });
  }
}

void verify_sim(CheckReport& rep, const std::vector<std::tuple<std::string, const Scenario*, Json>>& scenarios) {
  rep.guarded("sim", "rk4_order", [&] {
    const auto rhs = [](const Vector& x, double) { return Vector(-x); };
    const auto global_error = [&](int steps) {
      Vector x = Vector::Ones(1);
      const double dt = 1.0 / steps;
      for (int k = 0; k < steps; ++k) x = rk4_step(rhs, x, k * dt, dt);
      return std::abs(x(0) - std::exp(-1.0));
    };
    const double f1 = global_error(10) / global_error(20);
    const double f2 = global_error(20) / global_error(40);
    const bool ok = f1 >= 12.0 && f1 <= 20.0 && f2 >= 12.0 && f2 <= 20.0;
    rep.record("sim", "rk4_order", ok, "halving factors " + num(f1) + ", " + num(f2));
  });
  for (const auto& [name, s, doc] : scenarios) {
    rep.guarded("sim", name + "_equilibrium_residual", [&] {
      const GainSet gains = gains_from(doc, s->order_n);
      const ObserverSet obs = observer_from(doc, s->order_n);
      const double state = equilibrium_residual(s->game, s->plants, s->graph, gains, s->nash, Mode::StateBased);
      const double output =
          equilibrium_residual(s->game, s->plants, s->graph, gains, s->nash, Mode::OutputBased, obs);
      Vector off = s->nash;
      off(0) += 0.1;
      const double perturbed = equilibrium_residual(s->game, s->plants, s->graph, gains, off, Mode::StateBased);
      rep.record("sim", name + "_equilibrium_residual", state < 1e-9 && output < 1e-9 && perturbed > 0.0,
                 "state " + num(state) + ", output " + num(output) + ", perturbed " + num(perturbed));
    });
  }
}

}  // namespace

RunOutcome cmd_run(const Json& config, const std::filesystem::path& out_dir, std::ostream& out) {
  RunOutcome outcome;
  std::optional<ResolvedRun> r;
  try {
    r.emplace(build_run(config));
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    outcome.exit_code = kExitConfig;
    return outcome;
  }

  Json& summary = outcome.summary;
  summary["config_echo"] = r->echo;
  summary["gain_ordering_warnings"] = ordering_warnings(r->gains);
  for (const auto& w : summary["gain_ordering_warnings"]) out << "warning: " << w.get<std::string>() << "\n";

  std::filesystem::create_directories(out_dir);
  std::optional<Trajectory> traj;
  try {
    traj.emplace(run(r->scenario.game, r->scenario.plants, r->scenario.graph, r->gains, r->observer, r->sim, r->init,
                     r->scenario.nash));
  } catch (const Error& e) {
    const bool config_fault = e.code() == ErrorCode::ConfigInvalid || e.code() == ErrorCode::NotStronglyConnected;
    out << "error: " << e.what() << "\n";
    if (config_fault) {
      outcome.exit_code = kExitConfig;
      return outcome;
    }
    summary["diverged"] = true;
    summary["settle_time"] = nullptr;
    summary["lambda_hat"] = nullptr;
    summary["r_squared"] = nullptr;
    summary["final_residual"] = nullptr;
    summary["final_error"] = nullptr;
    std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";
    outcome.exit_code = kExitNumeric;
    return outcome;
  }

  {
    std::ofstream csv(out_dir / "trajectory.csv");
    write_trajectory_csv(csv, *traj);
  }
  const RunMetrics m = measure(*r, *traj);
  summary["diverged"] = false;
  summary["settle_time"] = optional_number(m.settle_time);
  summary["lambda_hat"] = optional_number(m.lambda_hat);
  summary["r_squared"] = optional_number(m.r_squared);
  summary["final_residual"] = m.final_residual;
  summary["final_error"] = m.final_error;
  summary["final_estimate_disagreement"] = m.final_disagreement;
  summary["observer_error"] = optional_number(m.observer_error);
  summary["nash"] = std::vector<double>(r->scenario.nash.data(), r->scenario.nash.data() + r->scenario.nash.size());
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";

  out << std::setprecision(6);
  out << "scenario " << r->scenario.name << ", algo " << to_string(r->sim.mode) << ", horizon " << r->sim.horizon
      << " s\n";
  out << "settle_time: " << (m.settle_time ? fmt_optional(m.settle_time) + " s" : "not settled") << "\n";
  out << "lambda_hat: " << (m.lambda_hat ? fmt_optional(m.lambda_hat) : "n/a")
      << ", r_squared: " << (m.r_squared ? fmt_optional(m.r_squared) : "n/a") << "\n";
  out << "final_residual ‖F(x(T))‖_∞: " << m.final_residual << "\n";
  out << "final_error ‖x(T) − x*‖_∞: " << m.final_error << "\n";
  out << "wrote " << (out_dir / "trajectory.csv").string() << " and " << (out_dir / "summary.json").string() << "\n";
  outcome.exit_code = m.settle_time ? kExitOk : kExitNumeric;
  return outcome;
}

int cmd_nash(const Json& config, std::ostream& out) {
  std::optional<ResolvedRun> r;
  try {
    r.emplace(build_run(config));
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const Scenario& s = r->scenario;
  Vector solved;
  try {
    solved = nash_solve(s.game, Vector::Zero(s.nash.size()), 1e-11);
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  const std::size_t m = s.game.dim();
  out << std::setprecision(12);
  out << "scenario " << s.name << " (" << s.game.players() << " players, m = " << m << ")\n";
  out << "player  oracle" << std::string(m > 1 ? 20 : 8, ' ') << "nash_solve\n";
  for (std::size_t i = 0; i < s.game.players(); ++i) {
    const auto seg = static_cast<Eigen::Index>(i * m);
    out << std::setw(6) << i + 1 << "  " << s.nash.segment(seg, static_cast<Eigen::Index>(m)).transpose() << "    "
        << solved.segment(seg, static_cast<Eigen::Index>(m)).transpose() << "\n";
  }
  out << "gap ‖oracle − solve‖_∞: " << inf_norm(solved - s.nash) << "\n";
  out << "‖F(oracle)‖_∞: " << inf_norm(pseudo_gradient(s.game, s.nash)) << "\n";
  out << "‖F(solve)‖_∞: " << inf_norm(pseudo_gradient(s.game, solved)) << "\n";
  if (r->formation) {
    const RowMatrix& d = r->formation->offsets;
    double worst = 0.0;
    out << "relative positions p_i* − p_1* (anchor d_i − d_1):\n";
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      const Vector rel = s.nash.segment(i * 2, 2) - s.nash.segment(0, 2);
      const Vector want = (d.row(i) - d.row(0)).transpose();
      for (Eigen::Index j = 0; j < d.rows(); ++j) {
        const Vector rel_ij = s.nash.segment(i * 2, 2) - s.nash.segment(j * 2, 2);
        worst = std::max(worst, inf_norm(rel_ij - (d.row(i) - d.row(j)).transpose()));
      }
      out << std::setw(6) << i + 1 << "  " << rel.transpose() << "    (" << want.transpose() << ")\n";
    }
    out << "max |(p_i* − p_j*) − (d_i − d_j)|: " << worst << "\n";
  }
  return kExitOk;
}

int cmd_verify(const VerifyOptions& options, std::ostream& out) {
  const auto selected = [&](const std::string& group) { return options.only.empty() || options.only.contains(group); };
  for (const auto& g : options.only) {
    if (g != "graph" && g != "control" && g != "game" && g != "sim") {
      out << "error: unknown check group '" << g << "' (expected graph, control, game, sim)\n";
      return kExitConfig;
    }
  }
  const auto start = std::chrono::steady_clock::now();
  CheckReport rep(out);

  const Json vehicles_doc = default_config("vehicles");
  const Json turbines_doc = default_config("turbines");
  std::optional<VehicleScenario> vehicles;
  std::optional<Scenario> turbines;
  rep.guarded("setup", "scenarios", [&] {
    vehicles.emplace(build_vehicle_formation(
        vehicle_params_from(options.vehicle_params.value_or(vehicles_doc.at("params")), false)));
    turbines.emplace(build_turbine_market(
        turbine_params_from(options.turbine_params.value_or(turbines_doc.at("params")), false)));
  });

  if (selected("graph")) verify_graph(rep, options.seed);
  if (selected("control")) verify_control(rep, vehicles_doc, turbines_doc);
  if (vehicles && turbines) {
    if (selected("game")) {
      verify_game(rep, {{"vehicles", &vehicles->scenario}, {"turbines", &*turbines}}, options.seed);
    }
    if (selected("sim")) {
      verify_sim(rep, {{"vehicles", &vehicles->scenario, vehicles_doc}, {"turbines", &*turbines, turbines_doc}});
    }
  } else if (selected("game") || selected("sim")) {
    rep.record("setup", "scenarios", false, "scenario construction failed; game/sim checks skipped");
  }

  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << rep.total() - rep.failed() << "/" << rep.total() << " checks passed in " << std::setprecision(3) << elapsed
      << " s\n";
  return rep.failed() == 0 ? kExitOk : kExitCheckFailed;
}

std::size_t sweep_threads() {
  if (const char* env = std::getenv("NASHSEEK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepCell> cmd_sweep(const Json& config, const std::string& param, const std::vector<Json>& values,
                                 std::ostream& csv, std::size_t threads) {
  const std::string key = expand_alias(param);
  if (!(key.starts_with("gains.") || key.starts_with("observer.") || key.starts_with("sim."))) {
    throw Error(ErrorCode::ConfigInvalid, "sweep parameter '" + param + "' is not a gain, observer or sim key");
  }

  std::vector<SweepCell> cells(values.size());
  const auto run_cell = [&](std::size_t i) {
    SweepCell& cell = cells[i];
    cell.value = values[i];
    Json doc = config;
    std::optional<ResolvedRun> r;
    try {
      apply_override(doc, key + "=" + values[i].dump());
      r.emplace(build_run(doc));
    } catch (const Error&) {
      cell.status = "config_error";
      return;
    }
    try {
      const Trajectory traj =
          run(r->scenario.game, r->scenario.plants, r->scenario.graph, r->gains, r->observer, r->sim, r->init,
              r->scenario.nash);
      const RunMetrics m = measure(*r, traj);
      cell.status = m.settle_time ? "settled" : "not_settled";
      cell.settle_time = m.settle_time;
      cell.lambda_hat = m.lambda_hat;
      cell.r_squared = m.r_squared;
      cell.observer_error = m.observer_error;
      cell.final_error = m.final_error;
    } catch (const Error& e) {
      cell.status = e.code() == ErrorCode::Diverged ? "diverged" : "config_error";
    }
  };

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(cells.size(), 1));
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  csv << "value,status,settle_time,lambda_hat,r_squared,observer_error,final_error\n";
  for (const auto& c : cells) {
    const std::string value = c.value.is_string() ? c.value.get<std::string>() : c.value.dump();
    csv << value << "," << c.status << "," << fmt_optional(c.settle_time) << "," << fmt_optional(c.lambda_hat) << ","
        << fmt_optional(c.r_squared) << "," << fmt_optional(c.observer_error) << "," << fmt_optional(c.final_error)
        << "\n";
  }
  return cells;
}

}  // namespace nashseek
