#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bas_sdre/scenario.hpp"
#include "bas_sdre/sim.hpp"

namespace bas_sdre {

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 0;
  bool passed = true;
};

struct ValidationBox {
  VectorXd lo;
  VectorXd hi;
};

/// Default sampling box for a benchmark: the 2D system uses [−5, 5]²; the
/// quadrotor uses positions in [−5, 5], ψ ∈ [−π, π], rates in [−3, 3].
ValidationBox default_box(const SdcSystem& sys);

/// Consistency checks for a scenario's model on random states:
///   factorization  ‖A(x)x − f(x)‖ / max(1, ‖f‖)            ≤ 1e−8
///   gradient       ∇h_i vs central differences (relative)   ≤ 1e−6
///   beta_tilde     |β̃(x)x − (β(x) − β°)| / max(1, |β−β°|) ≤ 1e−7
///   bas_sdc        |Aᶻx + gᶻu − γz − ż| / max(1, |ż|)       ≤ 1e−7
/// The last two only run when barrier states are embedded.
std::vector<CheckResult> validate_model(const Scenario& scenario,
                                        std::size_t samples, std::uint64_t seed,
                                        const ValidationBox& box);

struct CertifyResult {
  std::size_t evaluated = 0;
  std::size_t certified = 0;
  std::size_t failed_evaluations = 0;
  double min_eig = 0.0;

  double fraction() const {
    return evaluated == 0 ? 0.0
                          : static_cast<double>(certified) / static_cast<double>(evaluated);
  }
};

/// Fills the certificate columns of every row with a finite augmented state
/// by evaluating Q − Ṗ ≻ 0 for the BaS-SDRE law of the scenario.
CertifyResult certify_trajectory(const Scenario& scenario, Trajectory& traj);

}  // namespace bas_sdre
