#include "bas_sdre/sdc_model.hpp"

#include <algorithm>
#include <cmath>

#include "bas_sdre/error.hpp"

namespace bas_sdre {
namespace {

constexpr double kSeriesThreshold = 1e-4;

}  // namespace

double sinc(double psi) {
  if (std::abs(psi) < kSeriesThreshold) {
    const double p2 = psi * psi;
    return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
  }
  return std::sin(psi) / psi;
}

double cosc(double psi) {
  if (std::abs(psi) < kSeriesThreshold) {
    const double p2 = psi * psi;
    return psi * (-0.5 + p2 / 24.0 - p2 * p2 / 720.0);
  }
  return (std::cos(psi) - 1.0) / psi;
}

CostSpec CostSpec::constant(MatrixXd Q, MatrixXd R) {
  return CostSpec{[Q = std::move(Q)](const VectorXd&) { return Q; },
                  [R = std::move(R)](const VectorXd&) { return R; }};
}

FactorizationReport validate_factorization(const SdcSystem& sys,
                                           std::span<const VectorXd> samples,
                                           double tolerance) {
  if (!sys.f_of_x) {
    throw Error(ErrorCode::kMissingDirectDrift,
                "system '" + sys.name + "' has no direct drift f(x)");
  }
  FactorizationReport report;
  for (const VectorXd& x : samples) {
    const VectorXd f = (*sys.f_of_x)(x);
    const double err = (sys.A_of_x(x) * x - f).norm() / std::max(1.0, f.norm());
    if (err >= report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_state = x;
    }
    ++report.samples;
  }
  report.passed = report.max_relative_error <= tolerance;
  return report;
}

SdcSystem linear_2d_benchmark() {
  MatrixXd A(2, 2);
  A << 1.0, -5.0, 0.0, -1.0;
  MatrixXd g(2, 1);
  g << 0.0, 1.0;

  SdcSystem sys;
  sys.name = "linear2d";
  sys.n = 2;
  sys.m = 1;
  sys.A_of_x = [A](const VectorXd&) { return A; };
  sys.g_of_x = [g](const VectorXd&) { return g; };
  sys.f_of_x = [A](const VectorXd& x) -> VectorXd { return A * x; };
  sys.input_offset = VectorXd::Zero(1);
  return sys;
}

SdcSystem planar_quadrotor_benchmark(const QuadrotorParams& params) {
  const double m = params.mass;
  const double l = params.arm_length;
  const double grav = params.gravity;
  const double J = params.resolved_inertia();
  if (!(m > 0.0) || !(l > 0.0) || !(grav > 0.0) || !(J > 0.0)) {
    throw Error(ErrorCode::kInvalidParams,
                "quadrotor mass, arm length, gravity and inertia must be positive");
  }

  SdcSystem sys;
  sys.name = "quadrotor";
  sys.n = 6;
  sys.m = 2;
  sys.input_offset = VectorXd::Constant(2, 0.5 * m * grav);
  sys.position_indices = {0, 1};

  sys.A_of_x = [grav](const VectorXd& x) {
    MatrixXd A = MatrixXd::Zero(6, 6);
    A.topRightCorner(3, 3).setIdentity();
    A(3, 2) = grav * sinc(x(2));
    A(4, 2) = grav * cosc(x(2));
    return A;
  };
  sys.g_of_x = [m, l, J](const VectorXd& x) {
    MatrixXd g = MatrixXd::Zero(6, 2);
    const double s = std::sin(x(2)) / m;
    const double c = std::cos(x(2)) / m;
    g(3, 0) = s;
    g(3, 1) = s;
    g(4, 0) = c;
    g(4, 1) = c;
    g(5, 0) = -l / (2.0 * J);
    g(5, 1) = l / (2.0 * J);
    return g;
  };
  sys.f_of_x = [grav](const VectorXd& x) -> VectorXd {
    VectorXd f(6);
    f << x(3), x(4), x(5), grav * std::sin(x(2)), grav * (std::cos(x(2)) - 1.0),
        0.0;
    return f;
  };
  return sys;
}

}  // namespace bas_sdre
