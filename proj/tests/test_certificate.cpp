#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "bas_sdre/certificate.hpp"
#include "bas_sdre/controller.hpp"
#include "bas_sdre/error.hpp"

namespace bas_sdre {
namespace {

AugmentedSystem linear_plain() {
  return augment(linear_2d_benchmark(), SafetySpec{}, BarrierFunction::inverse(), 1.0);
}

AugmentedSystem linear_bas() {
  SafetySpec spec;
  spec.constraints.push_back(circle_obstacle(2.0, 2.0, 0.5, 2, {0, 1}));
  return augment(linear_2d_benchmark(), spec, BarrierFunction::inverse(), 1.0);
}

CostSpec cost(int n_bar) {
  return CostSpec::constant(MatrixXd::Identity(n_bar, n_bar), MatrixXd::Identity(1, 1));
}

VectorXd v3(double a, double b, double c) { return (VectorXd(3) << a, b, c).finished(); }

TEST(FlowDerivatives, ScalarStateDependentEntry) {
  SdcSystem s;
  s.name = "scalar";
  s.n = 1;
  s.m = 1;
  s.A_of_x = [](const VectorXd& x) { return MatrixXd::Constant(1, 1, x(0)); };
  s.g_of_x = [](const VectorXd&) { return MatrixXd::Ones(1, 1); };
  s.input_offset = VectorXd::Zero(1);
  const AugmentedSystem aug = augment(s, SafetySpec{}, BarrierFunction::inverse(), 1.0);
  const VectorXd x = VectorXd::Constant(1, 0.7);
  for (double v : {-2.3, 0.4, 5.0}) {
    const FlowDerivatives d = matrix_flow_derivatives(aug, cost(1), x, VectorXd::Constant(1, v));
    EXPECT_NEAR(d.A_dot(0, 0), v, 1e-6 * std::abs(v));
    EXPECT_EQ(d.G_dot.norm(), 0.0);
    EXPECT_EQ(d.Q_dot.norm(), 0.0);
  }
}

TEST(FlowDerivatives, LinearPlantBlockIsConstant) {
  const AugmentedSystem aug = linear_bas();
  const VectorXd xbar = v3(1.0, 0.5, 0.05);
  const PDotResult pd = compute_p_dot(aug, cost(3), xbar);
  const FlowDerivatives d = matrix_flow_derivatives(aug, cost(3), xbar, pd.A_c * xbar);
  EXPECT_LE(d.A_dot.topRows(2).norm(), 1e-12);
  EXPECT_GT(d.A_dot.row(2).norm(), 0.0);
}

TEST(PDot, VanishesForTheExactlyLinearSystem) {
  const AugmentedSystem aug = linear_plain();
  for (const VectorXd& x : {VectorXd(VectorXd::Constant(2, 1.0)),
                            (VectorXd(2) << -3.0, 0.4).finished()}) {
    const PDotResult pd = compute_p_dot(aug, cost(2), x);
    EXPECT_LE(pd.P_dot.norm(), 1e-7);
    const CertificateReport r = check_condition(aug, cost(2), x);
    EXPECT_TRUE(r.condition_holds);
    EXPECT_NEAR(r.min_eig_Q_hat, 1.0, 1e-7);
  }
}

TEST(PDot, VanishesAtTheOrigin) {
  const AugmentedSystem aug = linear_bas();
  const PDotResult pd = compute_p_dot(aug, cost(3), VectorXd::Zero(3));
  EXPECT_EQ(pd.P_dot.norm(), 0.0);
  EXPECT_TRUE(check_condition(aug, cost(3), VectorXd::Zero(3)).condition_holds);
}

TEST(PDot, LyapunovResidualAndBackendAgreement) {
  const AugmentedSystem aug = linear_bas();
  const PDotResult pd = compute_p_dot(aug, cost(3), v3(3.0, 1.0, 0.02));
  EXPECT_LE(pd.lyapunov_residual, 1e-8 * std::max(1.0, pd.Q_tilde.norm()));
  EXPECT_LE(pd.backend_disagreement, 1e-9);
  EXPECT_LE((pd.P_dot - pd.P_dot.transpose()).norm(), 1e-9 * std::max(1.0, pd.P_dot.norm()));
}

TEST(PDot, MatchesFiniteDifferenceOfRiccatiSolutions) {
  const AugmentedSystem aug = linear_bas();
  const CostSpec c = cost(3);
  VectorXd xbar(3);
  xbar << 3.0, 1.0, 0.0;
  xbar(2) = aug.consistent_barrier_state(xbar.head(2))(0);
  const PDotResult pd = compute_p_dot(aug, c, xbar);
  const VectorXd v = pd.A_c * xbar;
  const double delta = 1e-4;
  const auto P_at = [&](const VectorXd& y) {
    const auto M = aug.evaluate(y);
    return solve_care(M.A_bar, M.g_bar * M.g_bar.transpose(), MatrixXd::Identity(3, 3)).P;
  };
  const MatrixXd fd = (P_at(xbar + delta * v) - P_at(xbar - delta * v)) / (2.0 * delta);
  EXPECT_LE((fd - pd.P_dot).norm(), 1e-3 * pd.P_dot.norm());
}

TEST(Certificate, LyapunovFunctionBound) {
  const AugmentedSystem aug = linear_bas();
  for (const VectorXd& xbar : {v3(3.0, 1.0, 0.01), v3(0.5, 0.5, 0.0), v3(-1.0, 2.5, 0.1)}) {
    const CertificateReport r = check_condition(aug, cost(3), xbar);
    EXPECT_GT(r.W, 0.0);
    EXPECT_LE(r.W_dot, -r.xQx_hat + 1e-6);
    if (r.condition_holds) EXPECT_LT(r.W_dot, 0.0);
  }
  const CertificateReport at0 = check_condition(aug, cost(3), VectorXd::Zero(3));
  EXPECT_EQ(at0.W, 0.0);
}

TEST(Roa, ZeroBudgetIsInsufficient) {
  const AugmentedSystem aug = linear_bas();
  RoaSampling s;
  s.lo = VectorXd::Constant(2, -1.0);
  s.hi = VectorXd::Constant(2, 1.0);
  const RoaEstimate est = estimate_roa(aug, cost(3), {0.1, 1.0}, 0, s);
  EXPECT_EQ(est.c, 0.0);
  EXPECT_EQ(est.status, RoaStatus::kInsufficientSamples);
}

TEST(Roa, LinearSystemCertifiesEveryLevel) {
  const AugmentedSystem aug = linear_plain();
  RoaSampling s;
  s.lo = VectorXd::Constant(2, -2.0);
  s.hi = VectorXd::Constant(2, 2.0);
  s.seed = 4;
  const RoaEstimate est = estimate_roa(aug, cost(2), {0.1, 1.0, 10.0}, 100, s);
  EXPECT_EQ(est.status, RoaStatus::kCertified);
  EXPECT_EQ(est.failed_samples, 0u);
  double expected = 0.0;
  for (double c : {0.1, 1.0, 10.0}) {
    if (c <= est.max_sampled_W) expected = c;
  }
  EXPECT_EQ(est.c, expected);
  EXPECT_GT(est.c, 0.0);
}

TEST(Roa, BarrierSystemHasACertifiedLevel) {
  const AugmentedSystem aug = linear_bas();
  RoaSampling s;
  s.lo = VectorXd::Constant(2, -1.0);
  s.hi = VectorXd::Constant(2, 1.0);
  s.seed = 2;
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(std::pow(10.0, -2.0 + 0.1 * i));
  const RoaEstimate est = estimate_roa(aug, cost(3), grid, 200, s);
  EXPECT_GT(est.c, 0.0);
  EXPECT_EQ(est.samples, 200u);
}

}  // namespace
}  // namespace bas_sdre
