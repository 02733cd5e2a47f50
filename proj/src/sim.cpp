#include "bas_sdre/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "bas_sdre/certificate.hpp"
#include "bas_sdre/error.hpp"
#include "bas_sdre/trajectory_io.hpp"

namespace bas_sdre {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Plant-only step, defined even where the barrier state is not.
VectorXd rk4_plant_step(const SdcSystem& sys, const VectorXd& x,
                        const VectorXd& u, double h) {
  const VectorXd k1 = sys.rhs(x, u);
  const VectorXd k2 = sys.rhs(x + 0.5 * h * k1, u);
  const VectorXd k3 = sys.rhs(x + 0.5 * h * k2, u);
  const VectorXd k4 = sys.rhs(x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct StepOutcome {
  bool crossed = false;
  bool stalled = false;
  VectorXd crossing_state;
};

class Logger {
 public:
  explicit Logger(Trajectory& traj) : traj_(traj) {}

  void row(double t, const VectorXd& xbar, const VectorXd& u, const MatrixXd& K,
           double h_min, double z_cons,
           const std::optional<CertificateReport>& cert) {
    traj_.t.push_back(t);
    traj_.xbar.push_back(xbar);
    traj_.u.push_back(u);
    traj_.K.push_back(K);
    traj_.h_min.push_back(h_min);
    traj_.z_consistency.push_back(z_cons);
    traj_.W.push_back(cert ? cert->W : kNaN);
    traj_.W_dot.push_back(cert ? cert->W_dot : kNaN);
    traj_.min_eig_Q_hat.push_back(cert ? cert->min_eig_Q_hat : kNaN);
    traj_.xQx_hat.push_back(cert ? cert->xQx_hat : kNaN);
  }

 private:
  Trajectory& traj_;
};

}  // namespace

VectorXd rk4_held_input_step(const AugmentedSystem& aug, const VectorXd& xbar,
                             const VectorXd& u, double h) {
  const VectorXd k1 = aug.rhs(xbar, u);
  const VectorXd k2 = aug.rhs(xbar + 0.5 * h * k1, u);
  const VectorXd k3 = aug.rhs(xbar + 0.5 * h * k2, u);
  const VectorXd k4 = aug.rhs(xbar + h * k3, u);
  return xbar + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::string_view to_string(RolloutStatus status) {
  switch (status) {
    case RolloutStatus::kRunning: return "Running";
    case RolloutStatus::kConverged: return "Converged";
    case RolloutStatus::kUnsafe: return "Unsafe";
    case RolloutStatus::kControllerFailure: return "ControllerFailure";
    case RolloutStatus::kTimeout: return "Timeout";
    case RolloutStatus::kDiverged: return "Diverged";
  }
  return "Unknown";
}

std::optional<RolloutStatus> parse_rollout_status(std::string_view text) {
  for (auto s : {RolloutStatus::kRunning, RolloutStatus::kConverged,
                 RolloutStatus::kUnsafe, RolloutStatus::kControllerFailure,
                 RolloutStatus::kTimeout, RolloutStatus::kDiverged}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

RolloutOptions rollout_options_from(const ScenarioConfig& config) {
  RolloutOptions o;
  o.certificate = config.certificate_enabled;
  o.certificate_every = config.certificate_every;
  o.log_every = config.log_every;
  return o;
}

Trajectory rollout(const Scenario& scenario, const FeedbackLaw& law,
                   const VectorXd& x0, const RolloutOptions& options) {
  const ScenarioConfig& cfg = scenario.config;
  const AugmentedSystem& aug = law.model();
  const int n = aug.n();
  const int q = aug.q();
  const int m = aug.m();
  const double dt = options.dt.value_or(cfg.dt);
  const double t_final = options.t_final.value_or(cfg.t_final);
  const auto steps = static_cast<long long>(std::llround(t_final / dt));
  const bool certify = options.certificate && law.kind() == ControllerKind::kBasSdre;

  Trajectory traj;
  traj.n = n;
  traj.q = q;
  traj.m = m;
  traj.controller = law.kind();
  traj.dt = dt;
  Logger log(traj);

  const auto margin = [&](const VectorXd& x) { return scenario.monitor.min_margin(x); };
  const VectorXd nan_u = VectorXd::Constant(m, kNaN);
  const MatrixXd nan_K = MatrixXd::Constant(m, n + q, kNaN);

  VectorXd xbar(n + q);
  xbar.head(n) = x0;
  if (!(margin(x0) > 0.0)) {
    xbar.tail(q).setConstant(kNaN);
    log.row(0.0, xbar, nan_u, nan_K, margin(x0), kNaN, std::nullopt);
    traj.status = RolloutStatus::kUnsafe;
    traj.message = "initial state is unsafe";
    return traj;
  }
  if (q > 0) xbar.tail(q) = aug.consistent_barrier_state(x0);

  std::optional<MatrixXd> last_P;
  std::optional<MatrixXd> last_K;

  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double h_now = margin(xbar.head(n));
    const double z_now = aug.z_consistency(xbar);
    const bool log_this = k % options.log_every == 0;

    ControlResult control;
    try {
      control = law.evaluate(xbar, cfg.warm_start ? last_P : std::nullopt);
      last_K = control.K;
      if (control.riccati) last_P = control.riccati->P;
    } catch (const Error& e) {
      if (cfg.on_failure == FailurePolicy::kStaleGain && last_K) {
        control.K = *last_K;
        control.u = -control.K * xbar;
      } else {
        log.row(t, xbar, nan_u, nan_K, h_now, z_now, std::nullopt);
        traj.status = RolloutStatus::kControllerFailure;
        traj.message = e.what();
        return traj;
      }
    }

    const bool converged = xbar.norm() <= cfg.convergence_eps;
    const bool last_step = k >= steps;
    const bool terminal = last_step || (converged && cfg.stop_on_converge);

    std::optional<CertificateReport> cert;
    if (certify && (terminal || k % options.certificate_every == 0) &&
        (log_this || terminal)) {
      try {
        cert = check_condition(aug, law.cost(), xbar);
      } catch (const Error&) {
        cert.reset();
      }
    }
    if (log_this || terminal) log.row(t, xbar, control.u, control.K, h_now, z_now, cert);

    if (terminal) {
      traj.status = converged ? RolloutStatus::kConverged : RolloutStatus::kTimeout;
      return traj;
    }

    // Advance over [t, t + dt] with the input held, bisecting near the boundary.
    double remaining = dt;
    double h_step = dt;
    int halvings = 0;
    int substeps = 0;
    const int substep_budget = 8 * std::max(1, cfg.max_refinements);
    StepOutcome outcome;
    while (remaining > 1e-12 * dt) {
      const double h_try = std::min(h_step, remaining);
      if (++substeps > substep_budget) {
        // The barrier state has become too stiff to resolve; decide on the plant alone.
        const VectorXd xp = rk4_plant_step(aug.base(), xbar.head(n), control.u, remaining);
        outcome.crossing_state = VectorXd::Constant(n + q, kNaN);
        outcome.crossing_state.head(n) = xp;
        outcome.crossed = true;
        outcome.stalled = !(margin(xp) <= cfg.h_floor);
        remaining = 0.0;
        break;
      }
      bool ok = false;
      VectorXd next;
      try {
        next = rk4_held_input_step(aug, xbar, control.u, h_try);
        ok = next.allFinite() && margin(next.head(n)) > cfg.h_floor;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnsafeState) throw;
      }
      if (ok) {
        xbar = std::move(next);
        remaining -= h_try;
        continue;
      }
      if (!cfg.refine_boundary || halvings >= cfg.max_refinements) {
        outcome.crossed = true;
        outcome.crossing_state = VectorXd::Constant(n + q, kNaN);
        outcome.crossing_state.head(n) =
            rk4_plant_step(aug.base(), xbar.head(n), control.u, h_try);
        break;
      }
      h_step *= 0.5;
      ++halvings;
      ++traj.refinements;
    }

    if (outcome.crossed) {
      const double t_cross = t + (dt - remaining);
      const VectorXd& xc = outcome.crossing_state;
      log.row(t_cross, xc, nan_u, nan_K, margin(xc.head(n)), kNaN, std::nullopt);
      if (outcome.stalled) {
        traj.status = RolloutStatus::kControllerFailure;
        traj.message = "barrier state integration stalled near the boundary";
      } else {
        traj.status = RolloutStatus::kUnsafe;
        traj.message = "safety margin reached the floor";
      }
      return traj;
    }
    if (!xbar.allFinite() || xbar.norm() > cfg.divergence_bound) {
      log.row(t + dt, xbar, nan_u, nan_K, margin(xbar.head(n)), kNaN, std::nullopt);
      traj.status = RolloutStatus::kDiverged;
      traj.message = "state norm exceeded the divergence bound";
      return traj;
    }
  }
}

TrajectoryMetrics convergence_and_safety_metrics(const Trajectory& traj,
                                                 double convergence_eps) {
  if (traj.empty()) throw Error(ErrorCode::kEmptyTrajectory, "trajectory has no rows");
  TrajectoryMetrics mt;
  mt.min_h = std::numeric_limits<double>::infinity();
  mt.settling_time = kNaN;
  std::size_t certified = 0;
  std::size_t evaluated = 0;
  mt.min_certificate_eig = kNaN;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.h_min[i] < mt.min_h) {
      mt.min_h = traj.h_min[i];
      mt.t_min_h = traj.t[i];
    }
    if (traj.q > 0) {
      const VectorXd z = traj.xbar[i].tail(traj.q);
      if (z.allFinite()) {
        const double zmax = z.cwiseAbs().maxCoeff();
        if (zmax > mt.peak_abs_z) {
          mt.peak_abs_z = zmax;
          mt.t_peak_z = traj.t[i];
        }
      }
    }
    if (traj.u[i].allFinite()) mt.peak_u_norm = std::max(mt.peak_u_norm, traj.u[i].norm());
    const double lam = traj.min_eig_Q_hat[i];
    if (!std::isnan(lam)) {
      ++evaluated;
      if (lam > 0.0) ++certified;
      mt.min_certificate_eig =
          std::isnan(mt.min_certificate_eig) ? lam : std::min(mt.min_certificate_eig, lam);
    }
  }
  mt.final_norm = traj.xbar.back().norm();
  // Settling: last index where the norm is above eps, then the next sample.
  std::optional<std::size_t> last_outside;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (!(traj.xbar[i].norm() <= convergence_eps)) last_outside = i;
  }
  if (!last_outside) {
    mt.settling_time = traj.t.front();
  } else if (*last_outside + 1 < traj.size()) {
    mt.settling_time = traj.t[*last_outside + 1];
  }
  mt.certified_fraction =
      evaluated == 0 ? kNaN : static_cast<double>(certified) / static_cast<double>(evaluated);
  return mt;
}

bool ScenarioSummary::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const SummaryRow& r) {
    return r.status == RolloutStatus::kConverged;
  });
}

namespace {

void write_summary_files(const std::filesystem::path& dir, const Scenario& scenario,
                         const ScenarioSummary& summary, bool json) {
  const auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    return out;
  };
  const auto x0_text = [](const VectorXd& x0) {
    std::string s;
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      if (i) s += ' ';
      s += format_double(x0(i));
    }
    return s;
  };

  {
    auto out = open("summary.csv");
    out << "controller,ic_index,x0,status,min_h,t_min_h,final_norm,settling_time,"
           "peak_abs_z,t_peak_z,peak_u_norm,certified_fraction,min_certificate_eig,"
           "csv_file\n";
    for (const auto& r : summary.rows) {
      const auto& mt = r.metrics;
      out << to_string(r.controller) << ',' << r.ic_index << ',' << x0_text(r.x0) << ','
          << to_string(r.status) << ',' << format_double(mt.min_h) << ','
          << format_double(mt.t_min_h) << ',' << format_double(mt.final_norm) << ','
          << format_double(mt.settling_time) << ',' << format_double(mt.peak_abs_z) << ','
          << format_double(mt.t_peak_z) << ',' << format_double(mt.peak_u_norm) << ','
          << format_double(mt.certified_fraction) << ','
          << format_double(mt.min_certificate_eig) << ',' << r.csv_file << '\n';
    }
  }
  {
    auto out = open("summary.txt");
    out << fmt::format("scenario: {}\n", summary.name);
    out << fmt::format("{:<14} {:>4} {:<18} {:>12} {:>12} {:>10} {:>12} {:>10}\n",
                       "controller", "ic", "status", "min_h", "final_norm",
                       "settle_s", "peak_|z|", "cert_frac");
    for (const auto& r : summary.rows) {
      const auto& mt = r.metrics;
      out << fmt::format("{:<14} {:>4} {:<18} {:>12.5g} {:>12.5g} {:>10.4g} {:>12.5g} {:>10.4g}\n",
                         to_string(r.controller), r.ic_index, to_string(r.status),
                         mt.min_h, mt.final_norm, mt.settling_time, mt.peak_abs_z,
                         mt.certified_fraction);
    }
  }
  {
    nlohmann::ordered_json meta;
    meta["scenario"] = summary.name;
    meta["seed"] = scenario.config.seed;
    meta["dt"] = scenario.config.dt;
    meta["t_final"] = scenario.config.t_final;
    meta["n"] = scenario.model->n();
    meta["q"] = scenario.model->q();
    meta["m"] = scenario.model->m();
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : scenario.config.resolved) cfg[k] = v;
    meta["config"] = cfg;
    nlohmann::ordered_json obstacles = nlohmann::ordered_json::array();
    for (const auto& ob : scenario.config.obstacles) {
      obstacles.push_back({ob.cx, ob.cy, ob.radius});
    }
    meta["obstacles"] = obstacles;
    auto out = open("meta.json");
    out << meta.dump(2) << '\n';
  }
  if (json) {
    nlohmann::ordered_json j;
    j["scenario"] = summary.name;
    j["all_ok"] = summary.all_ok();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : summary.rows) {
      const auto& mt = r.metrics;
      const auto num = [](double v) -> nlohmann::ordered_json {
        return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
      };
      rows.push_back({{"controller", to_string(r.controller)},
                      {"ic_index", r.ic_index},
                      {"x0", std::vector<double>(r.x0.data(), r.x0.data() + r.x0.size())},
                      {"status", to_string(r.status)},
                      {"message", r.message},
                      {"min_h", num(mt.min_h)},
                      {"final_norm", num(mt.final_norm)},
                      {"settling_time", num(mt.settling_time)},
                      {"peak_abs_z", num(mt.peak_abs_z)},
                      {"peak_u_norm", num(mt.peak_u_norm)},
                      {"certified_fraction", num(mt.certified_fraction)},
                      {"csv_file", r.csv_file}});
    }
    j["rollouts"] = rows;
    auto out = open("summary.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace

ScenarioSummary run_scenario(const Scenario& scenario, const RunOptions& options) {
  const ScenarioConfig& cfg = scenario.config;
  ScenarioSummary summary;
  summary.name = cfg.name;

  std::vector<FeedbackLaw> laws;
  for (ControllerKind kind : cfg.controllers) laws.push_back(make_feedback_law(scenario, kind));

  const std::size_t n_ic = scenario.initial_conditions.size();
  const std::size_t total = laws.size() * n_ic;
  summary.rows.resize(total);
  std::vector<Trajectory> trajectories(total);

  const std::filesystem::path dir =
      options.output_dir.value_or(std::filesystem::path(cfg.output_dir));
  if (options.write_outputs) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
  }

  const RolloutOptions ro = rollout_options_from(cfg);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      try {
        const std::size_t li = job / n_ic;
        const std::size_t ii = job % n_ic;
        Trajectory traj = rollout(scenario, laws[li], scenario.initial_conditions[ii], ro);
        SummaryRow& row = summary.rows[job];
        row.controller = laws[li].kind();
        row.ic_index = ii;
        row.x0 = scenario.initial_conditions[ii];
        row.status = traj.status;
        row.message = traj.message;
        row.metrics = convergence_and_safety_metrics(traj, cfg.convergence_eps);
        row.csv_file = fmt::format("{}_ic{}.csv", to_string(row.controller), ii);
        if (options.write_outputs) write_trajectory_csv(dir / row.csv_file, traj);
        if (options.keep_trajectories) trajectories[job] = std::move(traj);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(total)));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  if (options.keep_trajectories) summary.trajectories = std::move(trajectories);
  if (options.write_outputs) write_summary_files(dir, scenario, summary, options.write_json);
  return summary;
}

}  // namespace bas_sdre
