#include <memory>

#include <gtest/gtest.h>

#include "bas_sdre/controller.hpp"
#include "bas_sdre/error.hpp"

namespace bas_sdre {
namespace {

std::shared_ptr<const AugmentedSystem> linear_model() {
  SafetySpec spec;
  spec.constraints.push_back(circle_obstacle(2.0, 2.0, 0.5, 2, {0, 1}));
  return std::make_shared<const AugmentedSystem>(
      augment(linear_2d_benchmark(), spec, BarrierFunction::inverse(), 1.0));
}

CostSpec augmented_cost(double r = 1.0) {
  return CostSpec::constant(augmented_state_weight(MatrixXd::Identity(2, 2), 1.0, 1),
                            MatrixXd::Constant(1, 1, r));
}

CostSpec plant_cost() {
  return CostSpec::constant(MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1));
}

VectorXd v3(double a, double b, double c) { return (VectorXd(3) << a, b, c).finished(); }

TEST(Controller, KindNames) {
  for (auto k : {ControllerKind::kBasSdre, ControllerKind::kVanillaSdre, ControllerKind::kBasLqr}) {
    EXPECT_EQ(parse_controller_kind(to_string(k)), k);
  }
  try {
    parse_controller_kind("pid");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

TEST(Controller, AllLawsVanishAtTheOrigin) {
  const auto model = linear_model();
  const VectorXd zero = VectorXd::Zero(3);
  for (const FeedbackLaw& law :
       {FeedbackLaw::bas_sdre(model, augmented_cost()),
        FeedbackLaw::vanilla_sdre(model, plant_cost()),
        FeedbackLaw::bas_lqr(model, augmented_cost())}) {
    EXPECT_EQ(law.evaluate(zero).u.norm(), 0.0) << to_string(law.kind());
  }
}

TEST(Controller, BasSdreClosedLoopIsHurwitz) {
  const auto model = linear_model();
  for (const VectorXd& xbar : {v3(1.0, 0.5, 0.0), v3(3.0, 1.5, 0.2), v3(-2.0, 3.0, -0.1)}) {
    const ControlResult r = bas_sdre_control(*model, augmented_cost(), xbar);
    ASSERT_TRUE(r.riccati.has_value());
    EXPECT_LT(max_real_part(r.riccati->closed_loop_eigs), 0.0);
    EXPECT_LE((r.u + r.K * xbar).norm(), 1e-12 * std::max(1.0, r.u.norm()));
    EXPECT_EQ(r.K.rows(), 1);
    EXPECT_EQ(r.K.cols(), 3);
  }
}

TEST(Controller, BasSdreRejectsUnsafeState) {
  try {
    bas_sdre_control(*linear_model(), augmented_cost(), v3(2.0, 2.0, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsafeState);
  }
}

TEST(Controller, LqrGainMatchesSdreAtOrigin) {
  const auto model = linear_model();
  const MatrixXd K0 = bas_lqr_gain(*model, augmented_cost());
  EXPECT_EQ(K0.rows(), 1);
  EXPECT_EQ(K0.cols(), 3);
  const ControlResult r = bas_sdre_control(*model, augmented_cost(), VectorXd::Zero(3));
  EXPECT_EQ(r.K, K0);
  const MatrixXd Ac = model->A_bar(VectorXd::Zero(3)) - model->g_bar(VectorXd::Zero(3)) * K0;
  EXPECT_LT(max_real_part(Ac.eigenvalues()), 0.0);
}

TEST(Controller, ExpensiveControlWeakensTheGain) {
  const auto model = linear_model();
  EXPECT_LT(bas_lqr_gain(*model, augmented_cost(10.0)).norm(),
            bas_lqr_gain(*model, augmented_cost(1.0)).norm());
}

TEST(Controller, FixedGainNeverChanges) {
  const auto model = linear_model();
  const FeedbackLaw law = FeedbackLaw::bas_lqr(model, augmented_cost());
  ASSERT_TRUE(law.fixed_gain().has_value());
  EXPECT_EQ(law.evaluate(v3(3.0, 1.0, 0.05)).K, *law.fixed_gain());
  EXPECT_EQ(law.evaluate(v3(-1.0, 2.0, 0.01)).K, *law.fixed_gain());
}

TEST(Controller, VanillaOnLinearPlantIsConstantLqr) {
  const SdcSystem sys = linear_2d_benchmark();
  const ControlResult at0 = vanilla_sdre_control(sys, plant_cost(), VectorXd::Zero(2));
  for (const VectorXd& x : {VectorXd(VectorXd::Constant(2, 1.5)), VectorXd(VectorXd::Constant(2, -4.0))}) {
    const ControlResult r = vanilla_sdre_control(sys, plant_cost(), x);
    EXPECT_LE((r.K - at0.K).norm(), 1e-12);
  }
  // The augmented wrapper pads zero columns for the barrier state.
  const FeedbackLaw law = FeedbackLaw::vanilla_sdre(linear_model(), plant_cost());
  const ControlResult wrapped = law.evaluate(v3(1.0, 0.5, 0.3));
  EXPECT_EQ(wrapped.K(0, 2), 0.0);
  EXPECT_LE((wrapped.K.leftCols(2) - at0.K).norm(), 1e-12);
}

TEST(Controller, QuadrotorHoverNeedsNoCorrection) {
  const SdcSystem quad = planar_quadrotor_benchmark();
  const CostSpec cost = CostSpec::constant(MatrixXd::Identity(6, 6), MatrixXd::Identity(2, 2));
  const ControlResult r = vanilla_sdre_control(quad, cost, VectorXd::Zero(6));
  EXPECT_EQ(r.u.norm(), 0.0);
  EXPECT_NEAR((quad.input_offset + r.u).sum(), 9.81, 1e-12);
}

TEST(Controller, WarmStartAgreesWithColdSolve) {
  const auto model = linear_model();
  const FeedbackLaw law = FeedbackLaw::bas_sdre(model, augmented_cost());
  const VectorXd a = v3(3.0, 1.0, 0.0);
  const ControlResult first = law.evaluate(a);
  const VectorXd b = v3(2.99, 1.01, 0.001);
  const ControlResult cold = law.evaluate(b);
  const ControlResult warm = law.evaluate(b, first.riccati->P);
  EXPECT_LE((cold.K - warm.K).norm(), 1e-7 * cold.K.norm());
}

}  // namespace
}  // namespace bas_sdre
