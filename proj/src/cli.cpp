#include "bas_sdre/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "bas_sdre/certificate.hpp"
#include "bas_sdre/error.hpp"
#include "bas_sdre/scenario.hpp"
#include "bas_sdre/sim.hpp"
#include "bas_sdre/trajectory_io.hpp"
#include "bas_sdre/validation.hpp"

namespace bas_sdre::cli {
namespace {

struct CommandSpec {
  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  int jobs = 0;
  bool json = false;
  // certify
  std::vector<std::string> trajectories;
  // roa
  std::size_t samples = 500;
  std::vector<double> levels;
  // validate
  std::string benchmark;
};

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kIoError: return kExitIoError;
    case ErrorCode::kDataFormat:
    case ErrorCode::kEmptyTrajectory:
    case ErrorCode::kConfigError:
    case ErrorCode::kOriginUnsafe: return kExitDataError;
    default: return kExitCheckFailed;
  }
}

Scenario load(const CommandSpec& spec) {
  std::vector<std::string> overrides = spec.overrides;
  if (spec.seed) overrides.push_back("scenario.seed=" + std::to_string(*spec.seed));
  return build_scenario(load_scenario(spec.config_path, overrides));
}

std::filesystem::path output_dir(const CommandSpec& spec, const Scenario& sc) {
  if (!spec.output_dir.empty()) return spec.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    return std::filesystem::path(env) / sc.config.name;
  }
  return sc.config.output_dir;
}

int jobs_for(const CommandSpec& spec) {
  if (spec.jobs > 0) return spec.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_run(const CommandSpec& spec, std::ostream& out) {
  const Scenario sc = load(spec);
  RunOptions opts;
  opts.jobs = jobs_for(spec);
  opts.write_json = spec.json;
  opts.output_dir = output_dir(spec, sc);
  const ScenarioSummary summary = run_scenario(sc, opts);
  std::size_t ok = 0;
  for (const auto& r : summary.rows) {
    fmt::print(out, "{:<14} ic{:<3} {:<18} min_h={:.6g}\n", to_string(r.controller),
               r.ic_index, to_string(r.status), r.metrics.min_h);
    if (r.status == RolloutStatus::kConverged) ++ok;
  }
  fmt::print(out, "{}/{} rollouts converged safely; outputs in {}\n", ok,
             summary.rows.size(), opts.output_dir->string());
  return summary.all_ok() ? kExitOk : kExitRolloutFailed;
}

int cmd_certify(const CommandSpec& spec, std::ostream& out) {
  const Scenario sc = load(spec);
  const std::filesystem::path dir = output_dir(spec, sc);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());

  std::vector<std::pair<std::string, Trajectory>> inputs;
  if (!spec.trajectories.empty()) {
    for (const auto& path : spec.trajectories) {
      inputs.emplace_back(std::filesystem::path(path).stem().string(),
                          read_trajectory_csv(std::filesystem::path(path)));
    }
  } else {
    const FeedbackLaw law = make_feedback_law(sc, ControllerKind::kBasSdre);
    for (std::size_t i = 0; i < sc.initial_conditions.size(); ++i) {
      inputs.emplace_back(fmt::format("bas_sdre_ic{}", i),
                          rollout(sc, law, sc.initial_conditions[i],
                                  rollout_options_from(sc.config)));
    }
  }

  std::size_t evaluated = 0;
  std::size_t certified = 0;
  for (auto& [name, traj] : inputs) {
    const CertifyResult res = certify_trajectory(sc, traj);
    evaluated += res.evaluated;
    certified += res.certified;
    write_trajectory_csv(dir / (name + "_certified.csv"), traj);
    fmt::print(out, "{:<24} certified {}/{} steps (min eig {:.6g})\n", name,
               res.certified, res.evaluated, res.min_eig);
  }
  const double fraction =
      evaluated == 0 ? 0.0 : static_cast<double>(certified) / static_cast<double>(evaluated);
  fmt::print(out, "verdict: Q - Pdot > 0 at {:.4f} of {} evaluated steps\n", fraction,
             evaluated);
  return kExitOk;
}

int cmd_roa(const CommandSpec& spec, std::ostream& out) {
  const Scenario sc = load(spec);
  RoaSampling sampling;
  const ValidationBox box = default_box(sc.model->base());
  const auto n = static_cast<std::size_t>(sc.model->n());
  sampling.lo = sc.config.sample_lo.size() == n
                    ? VectorXd(Eigen::Map<const VectorXd>(sc.config.sample_lo.data(), n))
                    : box.lo;
  sampling.hi = sc.config.sample_hi.size() == n
                    ? VectorXd(Eigen::Map<const VectorXd>(sc.config.sample_hi.data(), n))
                    : box.hi;
  sampling.seed = sc.config.seed;
  std::vector<double> levels = spec.levels;
  if (levels.empty()) {
    for (int i = 0; i <= 60; ++i) levels.push_back(std::pow(10.0, -2.0 + 0.1 * i));
  }
  const RoaEstimate est = estimate_roa(*sc.model, sc.augmented_cost, levels, spec.samples, sampling);
  fmt::print(out, "roa: c={:.6g} status={} samples={} failed={} first_failure_W={:.6g} max_W={:.6g}\n",
             est.c, to_string(est.status), est.samples, est.failed_samples,
             est.first_failure_W, est.max_sampled_W);
  return kExitOk;
}

int cmd_validate(const CommandSpec& spec, std::ostream& out) {
  ScenarioConfig cfg;
  if (!spec.config_path.empty()) {
    cfg = load_scenario(spec.config_path, spec.overrides);
  } else {
    cfg = parse_scenario("", spec.overrides);
    cfg.benchmark = spec.benchmark.empty() ? "linear2d" : spec.benchmark;
    if (cfg.benchmark == "linear2d") {
      cfg.obstacles = {{2.0, 2.0, 0.5}};
      cfg.q_diag = {1.0, 1.0};
      cfg.r_diag = {1.0};
    } else {
      cfg.obstacles = {{-2.0, 2.5, 0.6}, {1.5, 3.0, 0.5}};
      cfg.q_diag = std::vector<double>(6, 1.0);
      cfg.r_diag = {1.0, 1.0};
    }
  }
  if (!spec.benchmark.empty() && spec.benchmark != cfg.benchmark) {
    throw Error(ErrorCode::kConfigError, "--benchmark disagrees with the config");
  }
  const Scenario sc = build_scenario(cfg);
  const auto checks = validate_model(sc, spec.samples, spec.seed.value_or(cfg.seed),
                                     default_box(sc.model->base()));
  bool ok = true;
  for (const auto& c : checks) {
    fmt::print(out, "{:<14} max_error={:.3e} tol={:.0e} samples={} {}\n", c.name,
               c.max_error, c.tolerance, c.samples, c.passed ? "PASS" : "FAIL");
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_list(std::ostream& out) {
  const SdcSystem lin = linear_2d_benchmark();
  const SdcSystem quad = planar_quadrotor_benchmark();
  fmt::print(out, "{:<10} n={} m={}  unstable linear system, A=[[1,-5],[0,-1]], g=[0,1]\n",
             lin.name, lin.n, lin.m);
  fmt::print(out,
             "{:<10} n={} m={}  planar quadrotor (x, y, psi, xdot, ydot, psidot), "
             "hover-shifted thrusts\n",
             quad.name, quad.n, quad.m);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Barrier-state SDRE safe control toolkit", "bas_sdre"};
  app.require_subcommand(1);
  CommandSpec spec;

  const auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("-c,--config", spec.config_path, "scenario file");
    if (config_required) opt->required();
    sub->add_option("-o,--output-dir", spec.output_dir, "output directory");
    sub->add_option("--seed", spec.seed, "seed for every random draw");
    sub->add_option("--override", spec.overrides, "section.key=value (repeatable)");
    sub->add_option("-j,--jobs", spec.jobs, "parallel rollouts (default: cores)");
    sub->add_flag("--json", spec.json, "also write summary.json");
  };

  auto* run_cmd = app.add_subcommand("run", "run every controller on every initial condition");
  add_common(run_cmd, true);
  auto* certify_cmd = app.add_subcommand("certify", "evaluate Q - Pdot > 0 along trajectories");
  add_common(certify_cmd, true);
  certify_cmd->add_option("-t,--trajectory", spec.trajectories, "trajectory CSV (repeatable)");
  auto* roa_cmd = app.add_subcommand("roa", "sample-based certified level-set estimate");
  add_common(roa_cmd, true);
  roa_cmd->add_option("--samples", spec.samples, "number of accepted samples");
  roa_cmd->add_option("--levels", spec.levels, "candidate level values c");
  auto* validate_cmd = app.add_subcommand("validate", "model consistency checks");
  add_common(validate_cmd, false);
  validate_cmd->add_option("-b,--benchmark", spec.benchmark, "linear2d | quadrotor");
  validate_cmd->add_option("--samples", spec.samples, "random states per check");
  auto* list_cmd = app.add_subcommand("list-benchmarks", "list built-in plants");

  std::vector<const char*> argv{"bas_sdre"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(spec, out);
    if (certify_cmd->parsed()) return cmd_certify(spec, out);
    if (roa_cmd->parsed()) return cmd_roa(spec, out);
    if (validate_cmd->parsed()) {
      spec.samples = validate_cmd->count("--samples") ? spec.samples : 1000;
      return cmd_validate(spec, out);
    }
    if (list_cmd->parsed()) return cmd_list(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}

}  // namespace bas_sdre::cli
