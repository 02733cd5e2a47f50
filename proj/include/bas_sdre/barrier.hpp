#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bas_sdre/sdc_model.hpp"

namespace bas_sdre {

using ScalarFn = std::function<double(double)>;

/// Scalar barrier B on (0, ∞) with B(η) → ∞ as η → 0⁺. The composition
/// B′∘B⁻¹ is supplied in closed form so it stays smooth for any argument.
struct BarrierFunction {
  std::string name;
  ScalarFn B;
  ScalarFn B_prime;
  ScalarFn B_inverse;
  ScalarFn B_prime_of_B_inverse;

  /// B(η) = 1/η, B′∘B⁻¹(w) = −w².
  static BarrierFunction inverse();
  /// B(η) = −log(η / (1 + η)), B′∘B⁻¹(w) = −4 sinh²(w/2).
  static BarrierFunction logarithmic();
};

/// One scalar safety function h with its gradient; the safe set is h > 0.
struct SafetyConstraint {
  std::string label;
  std::function<double(const VectorXd&)> h;
  std::function<VectorXd(const VectorXd&)> grad_h;
};

/// h(x) = ‖p − c‖² − r² on the planar position p = (x[i], x[j]).
SafetyConstraint circle_obstacle(double cx, double cy, double radius, int n,
                                 std::array<int, 2> position_indices = {0, 1});

/// Aggregated safety function 1/h = Σ 1/h_i. Where some h_i ≤ 0 the value is
/// min_i h_i, so h > 0 exactly on the intersection of the safe sets.
SafetyConstraint aggregate(std::vector<SafetyConstraint> constraints);

enum class BarrierMode { kPerConstraint, kAggregated };

struct SafetySpec {
  std::vector<SafetyConstraint> constraints;
  BarrierMode mode = BarrierMode::kPerConstraint;

  /// The safety functions that receive one barrier state each.
  std::vector<SafetyConstraint> channels() const;
  /// min_i h_i(x); +∞ without constraints.
  double min_margin(const VectorXd& x) const;
};

struct QuadratureOptions {
  int initial_nodes = 16;
  int max_nodes = 512;
  double tolerance = 1e-8;
  /// Panel budget for the adaptive fallback used when the global rule stalls.
  int max_panels = 512;
  /// Density of the chord screening grid relative to the initial node count.
  int screening_factor = 10;
};

struct BetaTilde {
  /// Row vector β̃(x) with β̃(x)·x = β(x) − β(0).
  Eigen::RowVectorXd row;
  int nodes = 0;
};

/// β(x) = B(h(x)). Throws Error(kUnsafeState) if h(x) ≤ 0.
double barrier_value(const SafetyConstraint& c, const BarrierFunction& barrier,
                     const VectorXd& x);

/// ∫₀¹ ∇β(μx) dμ by Gauss–Legendre with node doubling. If doubling stalls at
/// max_nodes (a chord passing close to the boundary), [0, 1] is bisected into
/// panels until each agrees between two orders. With fixed_nodes > 0 that
/// order is used as is, which keeps the result a smooth function of x for
/// finite differencing.
///
/// Throws Error(kSegmentUnsafe) if the chord from the origin to x leaves the
/// safe set and Error(kQuadratureNotConverged) if the panel budget runs out.
BetaTilde beta_tilde(const SafetyConstraint& c, const BarrierFunction& barrier,
                     const VectorXd& x, const QuadratureOptions& options = {},
                     int fixed_nodes = 0);

/// Safety-embedded model x̄ = (x, z):
///   Ā(x̄) = [A(x), 0; Aᶻ(x, z), −γ I],  ḡ(x̄) = [g(x); gᶻ(x, z)].
/// Immutable after construction.
class AugmentedSystem {
 public:
  /// Throws Error(kOriginUnsafe) if some h_i(0) ≤ 0 and
  /// Error(kInvalidParams) if gamma ≤ 0.
  AugmentedSystem(SdcSystem base, SafetySpec safety, BarrierFunction barrier,
                  double gamma, QuadratureOptions quadrature = {});

  const SdcSystem& base() const { return base_; }
  const SafetySpec& safety() const { return safety_; }
  const BarrierFunction& barrier() const { return barrier_; }
  const QuadratureOptions& quadrature() const { return quadrature_; }
  double gamma() const { return gamma_; }
  int n() const { return base_.n; }
  int m() const { return base_.m; }
  int q() const { return static_cast<int>(channels_.size()); }
  int n_bar() const { return n() + q(); }
  /// β°_k = B(h_k(0)) per barrier state.
  const VectorXd& beta0() const { return beta0_; }

  /// β_k(x) for every barrier state. Throws Error(kUnsafeState).
  VectorXd beta(const VectorXd& x) const;
  /// z with zero tracking residual: z = β(x) − β°.
  VectorXd consistent_barrier_state(const VectorXd& x) const;
  /// |z + β° − β(x)|_∞.
  double z_consistency(const VectorXd& xbar) const;
  double min_margin(const VectorXd& x) const { return safety_.min_margin(x); }

  /// Nonlinear barrier-state dynamics
  ///   ż = B′(B⁻¹(z+β°)) (L_f h + L_g h u) − γ (z + β° − β(x)).
  VectorXd barrier_state_rhs(const VectorXd& xbar, const VectorXd& u) const;

  struct BarrierSdc {
    MatrixXd A_z;  // q × n
    MatrixXd g_z;  // q × m
    int quadrature_nodes = 0;
  };
  /// Aᶻ = B′(B⁻¹(z+β°)) ∇h A(x) + γ β̃(x),  gᶻ = B′(B⁻¹(z+β°)) ∇h g(x).
  BarrierSdc barrier_state_sdc(const VectorXd& xbar, int fixed_nodes = 0) const;

  struct Matrices {
    MatrixXd A_bar;
    MatrixXd g_bar;
    int quadrature_nodes = 0;
  };
  Matrices evaluate(const VectorXd& xbar, int fixed_nodes = 0) const;
  MatrixXd A_bar(const VectorXd& xbar) const { return evaluate(xbar).A_bar; }
  MatrixXd g_bar(const VectorXd& xbar) const { return evaluate(xbar).g_bar; }

  /// Full nonlinear augmented dynamics: plant drift + g u, then barrier_state_rhs.
  VectorXd rhs(const VectorXd& xbar, const VectorXd& u) const;

 private:
  SdcSystem base_;
  SafetySpec safety_;
  BarrierFunction barrier_;
  double gamma_;
  QuadratureOptions quadrature_;
  std::vector<SafetyConstraint> channels_;
  VectorXd beta0_;
};

inline AugmentedSystem augment(SdcSystem base, SafetySpec safety,
                               BarrierFunction barrier, double gamma) {
  return AugmentedSystem(std::move(base), std::move(safety), std::move(barrier),
                         gamma);
}

}  // namespace bas_sdre
