#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bas_sdre/barrier.hpp"
#include "bas_sdre/riccati.hpp"
#include "bas_sdre/sdc_model.hpp"

namespace bas_sdre {

/// Directional derivatives of the entries of Ā, Ḡ = ḡR⁻¹ḡᵀ and Q along the
/// closed-loop flow v = Ā_c x̄.
struct FlowDerivatives {
  MatrixXd A_dot;
  MatrixXd G_dot;
  MatrixXd Q_dot;
  /// Perturbation length actually used (0 when v = 0).
  double step = 0.0;
};

/// Optional exact directional derivatives supplied by a model; when set they
/// replace finite differences. Called as hook(xbar, v).
struct FlowDerivativeHook {
  std::function<FlowDerivatives(const VectorXd&, const VectorXd&)> evaluate;
};

/// Central differences along v̂ = v/‖v‖ with perturbation length
/// max(1e−6, 1e−6·‖x̄‖), scaled back by ‖v‖. The step is halved up to four
/// times if a perturbed state leaves the safe set.
///
/// Throws Error(kStepOutOfDomain).
FlowDerivatives matrix_flow_derivatives(const AugmentedSystem& aug,
                                        const CostSpec& cost,
                                        const VectorXd& xbar, const VectorXd& v,
                                        int quadrature_nodes = 0);

struct PDotResult {
  MatrixXd P_dot;
  MatrixXd Q_tilde;
  MatrixXd A_c;
  RiccatiSolution riccati;
  MatrixXd G;
  /// ‖Ṗ Ā_c + Ā_cᵀ Ṗ + Q̃‖_F.
  double lyapunov_residual = 0.0;
  /// ‖Ṗ_kron − Ṗ_bs‖_F / max(1, ‖Ṗ_kron‖_F).
  double backend_disagreement = 0.0;
};

/// Ṗ along the closed loop: Ṗ Ā_c + Ā_cᵀ Ṗ + Q̃ = 0 with
/// Q̃ = P Ȧ + Ȧᵀ P − P Ġ P + Q̇. Solved by both Lyapunov backends.
PDotResult compute_p_dot(const AugmentedSystem& aug, const CostSpec& cost,
                         const VectorXd& xbar,
                         const std::optional<FlowDerivativeHook>& hook = {});

struct CertificateReport {
  MatrixXd P_dot;
  /// λ_min of Q̂ = Q − Ṗ (symmetrized).
  double min_eig_Q_hat = 0.0;
  /// W = x̄ᵀ P x̄.
  double W = 0.0;
  /// Ẇ = x̄ᵀ(−Q̂ − P Ḡ P)x̄.
  double W_dot = 0.0;
  /// x̄ᵀ Q̂ x̄, so that Ẇ ≤ −x̄ᵀ Q̂ x̄.
  double xQx_hat = 0.0;
  bool condition_holds = false;
  /// ‖Q̂ − Q̂ᵀ‖_F before symmetrization; warn above 1e−8.
  double asymmetry = 0.0;
  bool asymmetry_warning = false;
};

CertificateReport check_condition(const AugmentedSystem& aug,
                                  const CostSpec& cost, const VectorXd& xbar,
                                  const std::optional<FlowDerivativeHook>& hook = {});

enum class RoaStatus { kCertified, kNoLevelPassed, kInsufficientSamples };

std::string_view to_string(RoaStatus status);

struct RoaEstimate {
  double c = 0.0;
  RoaStatus status = RoaStatus::kInsufficientSamples;
  std::size_t samples = 0;
  std::size_t failed_samples = 0;
  /// Smallest W among samples where the condition failed (∞ if none).
  double first_failure_W = 0.0;
  double max_sampled_W = 0.0;
};

struct RoaSampling {
  /// Plant states are drawn uniformly in [lo, hi]; barrier states are set to
  /// the consistent value β(x) − β°.
  VectorXd lo;
  VectorXd hi;
  std::uint64_t seed = 0;
  /// Rejection-sampling attempts per requested sample.
  int max_attempts_factor = 100;
};

/// Empirical inner estimate of the certified level set {x̄ᵀ P(x̄) x̄ ≤ c}:
/// the largest grid value c not exceeding the sampled W range such that every
/// sample with W ≤ c satisfies Q − Ṗ ≻ 0.
RoaEstimate estimate_roa(const AugmentedSystem& aug, const CostSpec& cost,
                         std::vector<double> c_grid, std::size_t sample_budget,
                         const RoaSampling& sampling);

}  // namespace bas_sdre
