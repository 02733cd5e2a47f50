#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bas_sdre {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using MatrixFn = std::function<MatrixXd(const VectorXd&)>;
using VectorFn = std::function<VectorXd(const VectorXd&)>;

/// Control-affine plant ẋ = A(x) x + g(x) u in state-dependent-coefficient
/// form. The optional direct drift f(x) is used for cross-checks and as the
/// ground-truth right-hand side in simulation.
struct SdcSystem {
  std::string name;
  int n = 0;
  int m = 0;
  MatrixFn A_of_x;
  MatrixFn g_of_x;
  std::optional<VectorFn> f_of_x;
  /// Input offset applied by the plant: physical input = input_offset + u.
  /// Zero except for plants whose unforced drift does not vanish at the origin.
  VectorXd input_offset;
  /// Indices of the planar position coordinates used by circular obstacles.
  std::array<int, 2> position_indices{0, 1};

  VectorXd drift(const VectorXd& x) const {
    return f_of_x ? (*f_of_x)(x) : VectorXd(A_of_x(x) * x);
  }
  VectorXd rhs(const VectorXd& x, const VectorXd& u) const {
    return drift(x) + g_of_x(x) * u;
  }
};

/// State and input weights. Q acts on the (possibly augmented) state the
/// controller sees; R on the input.
struct CostSpec {
  MatrixFn Q_of_x;
  MatrixFn R_of_x;

  static CostSpec constant(MatrixXd Q, MatrixXd R);
};

struct FactorizationReport {
  double max_relative_error = 0.0;
  VectorXd worst_state;
  std::size_t samples = 0;
  bool passed = true;
};

/// Max over samples of ‖A(x)x − f(x)‖ / max(1, ‖f(x)‖), pass at ≤ tolerance.
/// Throws Error(kMissingDirectDrift) if the system has no direct drift.
FactorizationReport validate_factorization(const SdcSystem& sys,
                                           std::span<const VectorXd> samples,
                                           double tolerance = 1e-8);

SdcSystem linear_2d_benchmark();

struct QuadrotorParams {
  double mass = 1.0;
  double arm_length = 0.3;
  double gravity = 9.81;
  /// Defaults to 0.2·m·l² when not set.
  std::optional<double> inertia;

  double resolved_inertia() const {
    return inertia.value_or(0.2 * mass * arm_length * arm_length);
  }
};

/// Planar quadrotor, state (x, y, ψ, ẋ, ẏ, ψ̇), input v = u − [mg/2, mg/2]ᵀ.
/// Throws Error(kInvalidParams) on non-positive constants.
SdcSystem planar_quadrotor_benchmark(const QuadrotorParams& params = {});

/// sin(ψ)/ψ and (cos ψ − 1)/ψ, with series evaluation near ψ = 0.
double sinc(double psi);
double cosc(double psi);

}  // namespace bas_sdre
