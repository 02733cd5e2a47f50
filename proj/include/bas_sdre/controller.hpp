#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include "bas_sdre/barrier.hpp"
#include "bas_sdre/riccati.hpp"
#include "bas_sdre/sdc_model.hpp"

namespace bas_sdre {

enum class ControllerKind { kBasSdre, kVanillaSdre, kBasLqr };

std::string_view to_string(ControllerKind kind);
/// Accepts "bas_sdre", "vanilla_sdre", "bas_lqr". Throws Error(kConfigError).
ControllerKind parse_controller_kind(std::string_view name);

struct ControlResult {
  VectorXd u;
  /// Gain acting on the augmented state, u = −K x̄ (m × n̄).
  MatrixXd K;
  /// Empty for the fixed-gain law.
  std::optional<RiccatiSolution> riccati;
};

/// u = −R⁻¹ ḡᵀ P x̄ with P solving the safety-embedded Riccati equation at x̄.
ControlResult bas_sdre_control(const AugmentedSystem& aug, const CostSpec& cost,
                               const VectorXd& xbar,
                               const CareOptions& care = {});

/// SDRE on the plant alone; cost acts on the n plant states.
ControlResult vanilla_sdre_control(const SdcSystem& sys, const CostSpec& cost,
                                   const VectorXd& x,
                                   const CareOptions& care = {});

/// Fixed gain from a single Riccati solve at x̄ = 0.
MatrixXd bas_lqr_gain(const AugmentedSystem& aug, const CostSpec& cost);

/// Block-diagonal augmented weight diag(Q_x, q_z I_q).
MatrixXd augmented_state_weight(const MatrixXd& Q_x, double q_z, int q);

/// A feedback law bound to its model, evaluated on the augmented state.
/// The vanilla law ignores the barrier states (zero gain columns).
class FeedbackLaw {
 public:
  static FeedbackLaw bas_sdre(std::shared_ptr<const AugmentedSystem> aug,
                              CostSpec cost);
  static FeedbackLaw vanilla_sdre(std::shared_ptr<const AugmentedSystem> aug,
                                  CostSpec plant_cost);
  static FeedbackLaw bas_lqr(std::shared_ptr<const AugmentedSystem> aug,
                             CostSpec cost);

  ControllerKind kind() const { return kind_; }
  const std::optional<MatrixXd>& fixed_gain() const { return fixed_gain_; }
  const AugmentedSystem& model() const { return *aug_; }
  const CostSpec& cost() const { return cost_; }

  /// With warm_start the previous Riccati solution seeds Newton–Kleinman.
  ControlResult evaluate(const VectorXd& xbar,
                         const std::optional<MatrixXd>& warm_start = {}) const;

 private:
  FeedbackLaw(ControllerKind kind, std::shared_ptr<const AugmentedSystem> aug,
              CostSpec cost)
      : kind_(kind), aug_(std::move(aug)), cost_(std::move(cost)) {}

  ControllerKind kind_;
  std::shared_ptr<const AugmentedSystem> aug_;
  CostSpec cost_;
  std::optional<MatrixXd> fixed_gain_;
};

}  // namespace bas_sdre
