#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bas_sdre/barrier.hpp"
#include "bas_sdre/controller.hpp"
#include "bas_sdre/sdc_model.hpp"

namespace bas_sdre {

struct Obstacle {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

enum class FailurePolicy { kTerminate, kStaleGain };

/// Parsed scenario file. Files are INI-style: `[section]` headers and
/// `key = value` lines; list values are separated by whitespace or commas.
/// See scenarios/README.md for the schema.
struct ScenarioConfig {
  // [scenario]
  std::string name = "scenario";
  std::uint64_t seed = 0;
  double convergence_eps = 1e-3;
  bool stop_on_converge = true;
  double divergence_bound = 1e6;

  // [system]
  std::string benchmark = "linear2d";
  QuadrotorParams quadrotor;

  // [obstacles]
  std::vector<Obstacle> obstacles;

  // [barrier]
  bool barrier_enabled = true;
  std::string barrier_kind = "inverse";
  double gamma = 1.0;
  BarrierMode mode = BarrierMode::kPerConstraint;

  // [cost]
  std::vector<double> q_diag;
  double q_z = 1.0;
  std::vector<double> r_diag;

  // [controller]
  std::vector<ControllerKind> controllers;
  FailurePolicy on_failure = FailurePolicy::kTerminate;
  bool warm_start = false;

  // [integrator]
  double dt = 1e-3;
  double t_final = 10.0;
  std::string method = "rk4";
  int log_every = 1;
  double h_floor = 1e-9;
  bool refine_boundary = true;
  int max_refinements = 50;

  // [initial_conditions]
  std::vector<std::vector<double>> initial_conditions;
  int sample_count = 0;
  std::vector<double> sample_lo;
  std::vector<double> sample_hi;

  // [certificate]
  bool certificate_enabled = false;
  int certificate_every = 1;

  // [outputs]
  std::string output_dir = "out";

  /// Every key/value after overrides, in file order, for run metadata.
  std::vector<std::pair<std::string, std::string>> resolved;
};

/// Parses scenario text. overrides are "section.key=value" strings applied
/// before validation. Unknown sections or keys and ill-typed values raise
/// Error(kConfigError).
ScenarioConfig parse_scenario(const std::string& text,
                              const std::vector<std::string>& overrides = {});

/// Reads and parses a scenario file. Error(kIoError) if it cannot be read.
ScenarioConfig load_scenario(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// The model objects a scenario describes.
struct Scenario {
  ScenarioConfig config;
  std::shared_ptr<const AugmentedSystem> model;
  /// Constraints monitored during simulation (independent of barrier_enabled).
  SafetySpec monitor;
  CostSpec augmented_cost;
  CostSpec plant_cost;
  /// Explicit initial conditions followed by the seeded samples.
  std::vector<VectorXd> initial_conditions;
};

/// Builds the model and resolves initial conditions. Checks that dt > 0,
/// t_final > dt, no obstacle contains the origin (Error(kOriginUnsafe)) and
/// every initial condition is strictly safe with a safe chord to the origin.
Scenario build_scenario(const ScenarioConfig& config);

FeedbackLaw make_feedback_law(const Scenario& scenario, ControllerKind kind);

/// True if h_i(μx) > 0 for all constraints on a uniform grid of μ ∈ [0, 1].
bool chord_is_safe(const SafetySpec& spec, const VectorXd& x, int grid = 1000);

SdcSystem make_benchmark(const ScenarioConfig& config);

}  // namespace bas_sdre
