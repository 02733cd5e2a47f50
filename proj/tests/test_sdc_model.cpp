#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bas_sdre/error.hpp"
#include "bas_sdre/riccati.hpp"
#include "bas_sdre/sdc_model.hpp"

namespace bas_sdre {
namespace {

VectorXd quad_state(double x, double y, double psi, double vx, double vy, double w) {
  VectorXd s(6);
  s << x, y, psi, vx, vy, w;
  return s;
}

TEST(Linear2d, MatricesAreConstant) {
  const SdcSystem sys = linear_2d_benchmark();
  MatrixXd A(2, 2);
  A << 1, -5, 0, -1;
  for (const VectorXd& x : {VectorXd(VectorXd::Zero(2)), VectorXd(VectorXd::Constant(2, 3.7))}) {
    EXPECT_EQ(sys.A_of_x(x), A);
    EXPECT_EQ(sys.g_of_x(x), (MatrixXd(2, 1) << 0, 1).finished());
  }
  const Eigen::VectorXcd eig = A.eigenvalues();
  EXPECT_NEAR(std::min(eig(0).real(), eig(1).real()), -1.0, 1e-14);
  EXPECT_NEAR(std::max(eig(0).real(), eig(1).real()), 1.0, 1e-14);
}

TEST(Linear2d, FactorizationIsExact) {
  const SdcSystem sys = linear_2d_benchmark();
  std::vector<VectorXd> xs{VectorXd::Zero(2), VectorXd::Constant(2, -4.0),
                           (VectorXd(2) << 2.5, -1.0).finished()};
  const FactorizationReport rep = validate_factorization(sys, xs);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.max_relative_error, 0.0);
}

TEST(Quadrotor, DefaultInertia) {
  EXPECT_NEAR(QuadrotorParams{}.resolved_inertia(), 0.018, 1e-15);
}

TEST(Quadrotor, HoverIsAnEquilibrium) {
  const SdcSystem sys = planar_quadrotor_benchmark();
  const VectorXd xdot = sys.rhs(VectorXd::Zero(6), VectorXd::Zero(2));
  EXPECT_EQ(xdot.norm(), 0.0);
  EXPECT_NEAR(sys.input_offset.sum(), 9.81, 1e-12);
}

TEST(Quadrotor, VerticalAccelerationAtThirtyDegrees) {
  const SdcSystem sys = planar_quadrotor_benchmark();
  const VectorXd x = quad_state(0.3, -0.2, std::numbers::pi / 6, 0, 0, 0);
  const VectorXd xdot = sys.rhs(x, VectorXd::Zero(2));
  EXPECT_NEAR(xdot(4), -1.3142, 1e-4);
  EXPECT_NEAR(xdot(4), 9.81 * (std::cos(std::numbers::pi / 6) - 1.0), 1e-12);
  EXPECT_NEAR(xdot(3), 9.81 * 0.5, 1e-12);
  EXPECT_LE((sys.A_of_x(x) * x - sys.f_of_x.value()(x)).norm(), 1e-12);
}

TEST(Quadrotor, FactorizationNearTheRemovableSingularity) {
  const SdcSystem sys = planar_quadrotor_benchmark();
  for (double psi : {0.7, 1e-12, -1e-12, 1e-4, -1e-4, 0.0}) {
    const VectorXd x = quad_state(1.0, -2.0, psi, 0.5, -0.3, 0.2);
    const MatrixXd A = sys.A_of_x(x);
    ASSERT_TRUE(A.allFinite());
    EXPECT_LE((A * x - sys.f_of_x.value()(x)).norm(), 1e-10) << "psi = " << psi;
  }
}

TEST(Quadrotor, EntriesContinuousAcrossZero) {
  const SdcSystem sys = planar_quadrotor_benchmark();
  const MatrixXd plus = sys.A_of_x(quad_state(0, 0, 1e-5, 0, 0, 0));
  const MatrixXd minus = sys.A_of_x(quad_state(0, 0, -1e-5, 0, 0, 0));
  const MatrixXd at0 = sys.A_of_x(quad_state(0, 0, 0, 0, 0, 0));
  EXPECT_LE((plus - at0).cwiseAbs().maxCoeff(), 9.81 * 1e-5);
  EXPECT_LE((minus - at0).cwiseAbs().maxCoeff(), 9.81 * 1e-5);
  EXPECT_NEAR(sinc(1e-5), 1.0, 1e-10);
  EXPECT_NEAR(cosc(1e-5), -0.5e-5, 1e-14);
  EXPECT_NEAR(cosc(0.5), (std::cos(0.5) - 1.0) / 0.5, 1e-15);
}

TEST(Quadrotor, RandomFactorizationAndStabilizability) {
  const SdcSystem sys = planar_quadrotor_benchmark();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-5, 5), ang(-std::numbers::pi, std::numbers::pi),
      rate(-3, 3);
  std::vector<VectorXd> xs;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(quad_state(pos(rng), pos(rng), ang(rng), rate(rng), rate(rng), rate(rng)));
  }
  EXPECT_TRUE(validate_factorization(sys, xs).passed);
  int stabilizable = 0;
  for (const auto& x : xs) {
    stabilizable += check_stabilizability(sys.A_of_x(x), sys.g_of_x(x)).stabilizable;
  }
  EXPECT_EQ(stabilizable, 1000);
}

TEST(Quadrotor, RejectsNonPositiveConstants) {
  QuadrotorParams p;
  p.mass = 0.0;
  try {
    planar_quadrotor_benchmark(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidParams);
  }
}

TEST(Factorization, MissingDriftIsReported) {
  SdcSystem sys = linear_2d_benchmark();
  sys.f_of_x.reset();
  std::vector<VectorXd> xs{VectorXd::Ones(2)};
  try {
    validate_factorization(sys, xs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingDirectDrift);
  }
}

}  // namespace
}  // namespace bas_sdre
