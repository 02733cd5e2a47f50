#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bas_sdre/controller.hpp"
#include "bas_sdre/scenario.hpp"

namespace bas_sdre {

enum class RolloutStatus { kRunning, kConverged, kUnsafe, kControllerFailure, kTimeout, kDiverged };

std::string_view to_string(RolloutStatus status);
std::optional<RolloutStatus> parse_rollout_status(std::string_view text);

/// Columnar log of one closed-loop rollout. Certificate columns are NaN where
/// they were not evaluated.
struct Trajectory {
  int n = 0;
  int q = 0;
  int m = 0;
  ControllerKind controller = ControllerKind::kBasSdre;
  std::vector<double> t;
  std::vector<VectorXd> xbar;
  std::vector<VectorXd> u;
  std::vector<double> h_min;
  std::vector<double> z_consistency;
  std::vector<double> W;
  std::vector<double> W_dot;
  std::vector<double> min_eig_Q_hat;
  /// x̄ᵀ(Q − Ṗ)x̄, for checking Ẇ ≤ −x̄ᵀQ̂x̄.
  std::vector<double> xQx_hat;
  std::vector<MatrixXd> K;
  RolloutStatus status = RolloutStatus::kRunning;
  std::string message;
  /// Time step actually configured, recorded for metadata.
  double dt = 0.0;
  /// Number of boundary step refinements performed.
  int refinements = 0;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
};

struct RolloutOptions {
  /// Evaluate the certificate columns (BaS-SDRE on the embedded model only).
  bool certificate = false;
  int certificate_every = 1;
  int log_every = 1;
  /// Overrides ScenarioConfig::dt / t_final when set.
  std::optional<double> dt;
  std::optional<double> t_final;
};

/// Fixed-step RK4 on the full nonlinear augmented dynamics with the input
/// held over each step. The barrier state is integrated with its nonlinear
/// equation and initialised to β(x₀) − β°. A step that leaves the safe set
/// is bisected (when refine_boundary is set) until the crossing is resolved
/// or the margin falls below h_floor.
Trajectory rollout(const Scenario& scenario, const FeedbackLaw& law,
                   const VectorXd& x0, const RolloutOptions& options = {});

RolloutOptions rollout_options_from(const ScenarioConfig& config);

/// One classical RK4 step of the augmented dynamics with u held constant.
VectorXd rk4_held_input_step(const AugmentedSystem& aug, const VectorXd& xbar,
                             const VectorXd& u, double h);

struct TrajectoryMetrics {
  double min_h = 0.0;
  double t_min_h = 0.0;
  double final_norm = 0.0;
  /// First time after which ‖x̄‖ ≤ eps for the rest of the log; NaN if never.
  double settling_time = 0.0;
  double peak_abs_z = 0.0;
  double t_peak_z = 0.0;
  double peak_u_norm = 0.0;
  /// Fraction of certificate-evaluated rows where λ_min(Q − Ṗ) > 0 (NaN if none).
  double certified_fraction = 0.0;
  double min_certificate_eig = 0.0;
};

/// Throws Error(kEmptyTrajectory).
TrajectoryMetrics convergence_and_safety_metrics(const Trajectory& traj,
                                                 double convergence_eps);

struct SummaryRow {
  ControllerKind controller = ControllerKind::kBasSdre;
  std::size_t ic_index = 0;
  VectorXd x0;
  RolloutStatus status = RolloutStatus::kRunning;
  std::string message;
  TrajectoryMetrics metrics;
  std::string csv_file;
};

struct ScenarioSummary {
  std::string name;
  std::vector<SummaryRow> rows;
  /// Kept only when RunOptions::keep_trajectories is set (same order as rows).
  std::vector<Trajectory> trajectories;

  bool all_ok() const;
};

struct RunOptions {
  int jobs = 1;
  bool write_outputs = true;
  bool write_json = false;
  bool keep_trajectories = false;
  std::optional<std::filesystem::path> output_dir;
};

/// Runs every (controller, initial condition) pair. Writes one CSV per
/// rollout, summary.csv, summary.txt and meta.json (plus summary.json with
/// write_json) into the output directory. Output is deterministic for a
/// given config. Throws Error(kIoError) when outputs cannot be written.
ScenarioSummary run_scenario(const Scenario& scenario, const RunOptions& options = {});

}  // namespace bas_sdre
