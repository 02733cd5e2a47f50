#include "bas_sdre/controller.hpp"

#include <string>

#include "bas_sdre/error.hpp"

namespace bas_sdre {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kBasSdre: return "bas_sdre";
    case ControllerKind::kVanillaSdre: return "vanilla_sdre";
    case ControllerKind::kBasLqr: return "bas_lqr";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(std::string_view name) {
  if (name == "bas_sdre") return ControllerKind::kBasSdre;
  if (name == "vanilla_sdre") return ControllerKind::kVanillaSdre;
  if (name == "bas_lqr") return ControllerKind::kBasLqr;
  throw Error(ErrorCode::kConfigError,
              "unknown controller kind '" + std::string(name) + "'");
}

namespace {

ControlResult sdre(const MatrixXd& A, const MatrixXd& g, const MatrixXd& Q,
                   const MatrixXd& R, const VectorXd& x, const CareOptions& care) {
  Eigen::LLT<MatrixXd> R_chol(R);
  if (R_chol.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidParams, "R is not positive definite");
  }
  const MatrixXd Rinv_gt = R_chol.solve(g.transpose());
  const MatrixXd G = symmetrize(g * Rinv_gt);
  ControlResult out;
  out.riccati = solve_care(A, G, Q, care);
  out.K = Rinv_gt * out.riccati->P;
  out.u = -out.K * x;
  return out;
}

}  // namespace

MatrixXd augmented_state_weight(const MatrixXd& Q_x, double q_z, int q) {
  const Eigen::Index n = Q_x.rows();
  MatrixXd Q = MatrixXd::Zero(n + q, n + q);
  Q.topLeftCorner(n, n) = Q_x;
  Q.bottomRightCorner(q, q).diagonal().setConstant(q_z);
  return Q;
}

ControlResult bas_sdre_control(const AugmentedSystem& aug, const CostSpec& cost,
                               const VectorXd& xbar, const CareOptions& care) {
  if (!(aug.min_margin(xbar.head(aug.n())) > 0.0)) {
    throw Error(ErrorCode::kUnsafeState, "bas_sdre_control at an unsafe state");
  }
  const auto mats = aug.evaluate(xbar);
  return sdre(mats.A_bar, mats.g_bar, cost.Q_of_x(xbar), cost.R_of_x(xbar), xbar,
              care);
}

ControlResult vanilla_sdre_control(const SdcSystem& sys, const CostSpec& cost,
                                   const VectorXd& x, const CareOptions& care) {
  return sdre(sys.A_of_x(x), sys.g_of_x(x), cost.Q_of_x(x), cost.R_of_x(x), x,
              care);
}

MatrixXd bas_lqr_gain(const AugmentedSystem& aug, const CostSpec& cost) {
  const VectorXd origin = VectorXd::Zero(aug.n_bar());
  return bas_sdre_control(aug, cost, origin).K;
}

FeedbackLaw FeedbackLaw::bas_sdre(std::shared_ptr<const AugmentedSystem> aug,
                                  CostSpec cost) {
  return FeedbackLaw(ControllerKind::kBasSdre, std::move(aug), std::move(cost));
}

FeedbackLaw FeedbackLaw::vanilla_sdre(std::shared_ptr<const AugmentedSystem> aug,
                                      CostSpec plant_cost) {
  return FeedbackLaw(ControllerKind::kVanillaSdre, std::move(aug),
                     std::move(plant_cost));
}

FeedbackLaw FeedbackLaw::bas_lqr(std::shared_ptr<const AugmentedSystem> aug,
                                 CostSpec cost) {
  FeedbackLaw law(ControllerKind::kBasLqr, std::move(aug), std::move(cost));
  law.fixed_gain_ = bas_lqr_gain(*law.aug_, law.cost_);
  return law;
}

ControlResult FeedbackLaw::evaluate(const VectorXd& xbar,
                                    const std::optional<MatrixXd>& warm_start) const {
  CareOptions care;
  care.warm_start = warm_start;
  switch (kind_) {
    case ControllerKind::kBasSdre:
      return bas_sdre_control(*aug_, cost_, xbar, care);
    case ControllerKind::kVanillaSdre: {
      const int n = aug_->n();
      ControlResult r =
          vanilla_sdre_control(aug_->base(), cost_, xbar.head(n), care);
      MatrixXd K = MatrixXd::Zero(aug_->m(), aug_->n_bar());
      K.leftCols(n) = r.K;
      r.K = std::move(K);
      return r;
    }
    case ControllerKind::kBasLqr: {
      ControlResult r;
      r.K = *fixed_gain_;
      r.u = -r.K * xbar;
      return r;
    }
  }
  throw Error(ErrorCode::kConfigError, "unhandled controller kind");
}

}  // namespace bas_sdre
