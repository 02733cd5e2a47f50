#include "bas_sdre/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "bas_sdre/error.hpp"
#include "bas_sdre/quadrature.hpp"

namespace bas_sdre {

BarrierFunction BarrierFunction::inverse() {
  return BarrierFunction{
      "inverse",
      [](double eta) { return 1.0 / eta; },
      [](double eta) { return -1.0 / (eta * eta); },
      [](double w) { return 1.0 / w; },
      [](double w) { return -w * w; },
  };
}

BarrierFunction BarrierFunction::logarithmic() {
  return BarrierFunction{
      "log",
      [](double eta) { return std::log1p(1.0 / eta); },
      [](double eta) { return -1.0 / (eta * (1.0 + eta)); },
      [](double w) { return 1.0 / std::expm1(w); },
      [](double w) {
        const double s = std::sinh(0.5 * w);
        return -4.0 * s * s;
      },
  };
}

SafetyConstraint circle_obstacle(double cx, double cy, double radius, int n,
                                 std::array<int, 2> idx) {
  const double r2 = radius * radius;
  SafetyConstraint c;
  c.label = "circle(" + std::to_string(cx) + "," + std::to_string(cy) + "," +
            std::to_string(radius) + ")";
  c.h = [=](const VectorXd& x) {
    const double dx = x(idx[0]) - cx;
    const double dy = x(idx[1]) - cy;
    return dx * dx + dy * dy - r2;
  };
  c.grad_h = [=](const VectorXd& x) {
    VectorXd g = VectorXd::Zero(n);
    g(idx[0]) = 2.0 * (x(idx[0]) - cx);
    g(idx[1]) = 2.0 * (x(idx[1]) - cy);
    return g;
  };
  return c;
}

SafetyConstraint aggregate(std::vector<SafetyConstraint> constraints) {
  SafetyConstraint agg;
  agg.label = "aggregated";
  auto shared = std::make_shared<const std::vector<SafetyConstraint>>(
      std::move(constraints));
  agg.h = [shared](const VectorXd& x) {
    double inv_sum = 0.0;
    double min_h = std::numeric_limits<double>::infinity();
    for (const auto& c : *shared) {
      const double hi = c.h(x);
      min_h = std::min(min_h, hi);
      inv_sum += 1.0 / hi;
    }
    if (!(min_h > 0.0)) return min_h;
    return 1.0 / inv_sum;
  };
  agg.grad_h = [shared, h = agg.h](const VectorXd& x) {
    // ∇h = h² Σ ∇h_i / h_i².
    const double hv = h(x);
    VectorXd g = VectorXd::Zero(x.size());
    for (const auto& c : *shared) {
      const double hi = c.h(x);
      g += c.grad_h(x) / (hi * hi);
    }
    return VectorXd(hv * hv * g);
  };
  return agg;
}

std::vector<SafetyConstraint> SafetySpec::channels() const {
  if (constraints.empty()) return {};
  if (mode == BarrierMode::kAggregated) return {aggregate(constraints)};
  return constraints;
}

double SafetySpec::min_margin(const VectorXd& x) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) m = std::min(m, c.h(x));
  return m;
}

double barrier_value(const SafetyConstraint& c, const BarrierFunction& barrier,
                     const VectorXd& x) {
  const double hv = c.h(x);
  if (!(hv > 0.0)) {
    throw Error(ErrorCode::kUnsafeState,
                c.label + ": h(x) = " + std::to_string(hv) + " is not positive");
  }
  return barrier.B(hv);
}

namespace {

Eigen::RowVectorXd integrate_gradient(const SafetyConstraint& c,
                                      const BarrierFunction& barrier,
                                      const VectorXd& x, int order, double lo = 0.0,
                                      double hi = 1.0) {
  const GaussRule& rule = gauss_legendre_unit(order);
  const double width = hi - lo;
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(x.size());
  for (int k = 0; k < order; ++k) {
    const VectorXd y = (lo + width * rule.nodes[k]) * x;
    const double hv = c.h(y);
    if (!(hv > 0.0)) {
      throw Error(ErrorCode::kSegmentUnsafe,
                  c.label + ": chord from the origin leaves the safe set");
    }
    acc += rule.weights[k] * barrier.B_prime(hv) * c.grad_h(y).transpose();
  }
  return width * acc;
}

// Bisects [0, 1] until every panel's pair of rules agrees.
std::optional<BetaTilde> integrate_adaptive(const SafetyConstraint& c,
                                            const BarrierFunction& barrier,
                                            const VectorXd& x,
                                            const QuadratureOptions& options) {
  const int coarse = options.initial_nodes;
  const int fine = 2 * options.initial_nodes;
  struct Panel {
    double lo, hi;
  };
  std::vector<Panel> pending{{0.0, 1.0}};
  Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(x.size());
  Eigen::RowVectorXd scale = integrate_gradient(c, barrier, x, fine);
  int panels = 0;
  int evaluations = fine;
  while (!pending.empty()) {
    const Panel p = pending.back();
    pending.pop_back();
    if (++panels > options.max_panels) return std::nullopt;
    const Eigen::RowVectorXd a = integrate_gradient(c, barrier, x, coarse, p.lo, p.hi);
    const Eigen::RowVectorXd b = integrate_gradient(c, barrier, x, fine, p.lo, p.hi);
    evaluations += coarse + fine;
    const double allowed =
        options.tolerance * std::max(1.0, scale.norm()) * (p.hi - p.lo);
    if ((b - a).norm() <= allowed) {
      total += b;
    } else {
      const double mid = 0.5 * (p.lo + p.hi);
      pending.push_back({mid, p.hi});
      pending.push_back({p.lo, mid});
    }
  }
  return BetaTilde{std::move(total), evaluations};
}

}  // namespace

BetaTilde beta_tilde(const SafetyConstraint& c, const BarrierFunction& barrier,
                     const VectorXd& x, const QuadratureOptions& options,
                     int fixed_nodes) {
  const int screen = std::max(1, options.screening_factor * options.initial_nodes);
  for (int k = 0; k <= screen; ++k) {
    const double mu = static_cast<double>(k) / screen;
    if (!(c.h(mu * x) > 0.0)) {
      throw Error(ErrorCode::kSegmentUnsafe,
                  c.label + ": chord from the origin leaves the safe set");
    }
  }
  if (fixed_nodes > 0) {
    return BetaTilde{integrate_gradient(c, barrier, x, fixed_nodes), fixed_nodes};
  }
  int order = options.initial_nodes;
  Eigen::RowVectorXd prev = integrate_gradient(c, barrier, x, order);
  while (order < options.max_nodes) {
    order *= 2;
    Eigen::RowVectorXd next = integrate_gradient(c, barrier, x, order);
    const double diff = (next - prev).norm();
    if (diff < options.tolerance * std::max(1.0, next.norm())) {
      return BetaTilde{std::move(next), order};
    }
    prev = std::move(next);
  }
  if (auto adaptive = integrate_adaptive(c, barrier, x, options)) return *adaptive;
  throw Error(ErrorCode::kQuadratureNotConverged,
              c.label + ": beta_tilde did not converge with " +
                  std::to_string(options.max_nodes) + " nodes");
}

AugmentedSystem::AugmentedSystem(SdcSystem base, SafetySpec safety,
                                 BarrierFunction barrier, double gamma,
                                 QuadratureOptions quadrature)
    : base_(std::move(base)),
      safety_(std::move(safety)),
      barrier_(std::move(barrier)),
      gamma_(gamma),
      quadrature_(quadrature) {
  if (!(gamma_ > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "gamma must be positive");
  }
  const VectorXd origin = VectorXd::Zero(base_.n);
  for (const auto& c : safety_.constraints) {
    if (!(c.h(origin) > 0.0)) {
      throw Error(ErrorCode::kOriginUnsafe, c.label + " contains the origin");
    }
  }
  channels_ = safety_.channels();
  beta0_.resize(q());
  for (int k = 0; k < q(); ++k) {
    beta0_(k) = barrier_.B(channels_[k].h(origin));
  }
}

VectorXd AugmentedSystem::beta(const VectorXd& x) const {
  VectorXd b(q());
  for (int k = 0; k < q(); ++k) b(k) = barrier_value(channels_[k], barrier_, x);
  return b;
}

VectorXd AugmentedSystem::consistent_barrier_state(const VectorXd& x) const {
  return beta(x) - beta0_;
}

double AugmentedSystem::z_consistency(const VectorXd& xbar) const {
  if (q() == 0) return 0.0;
  const VectorXd x = xbar.head(n());
  return (xbar.tail(q()) + beta0_ - beta(x)).cwiseAbs().maxCoeff();
}

VectorXd AugmentedSystem::barrier_state_rhs(const VectorXd& xbar,
                                            const VectorXd& u) const {
  const VectorXd x = xbar.head(n());
  const VectorXd z = xbar.tail(q());
  const VectorXd xdot = base_.rhs(x, u);
  VectorXd zdot(q());
  for (int k = 0; k < q(); ++k) {
    const double w = z(k) + beta0_(k);
    const double coeff = barrier_.B_prime_of_B_inverse(w);
    const double beta_k = barrier_value(channels_[k], barrier_, x);
    zdot(k) = coeff * channels_[k].grad_h(x).dot(xdot) - gamma_ * (w - beta_k);
  }
  return zdot;
}

AugmentedSystem::BarrierSdc AugmentedSystem::barrier_state_sdc(
    const VectorXd& xbar, int fixed_nodes) const {
  const VectorXd x = xbar.head(n());
  const VectorXd z = xbar.tail(q());
  const MatrixXd A = base_.A_of_x(x);
  const MatrixXd g = base_.g_of_x(x);
  BarrierSdc out;
  out.A_z.resize(q(), n());
  out.g_z.resize(q(), m());
  for (int k = 0; k < q(); ++k) {
    const double coeff = barrier_.B_prime_of_B_inverse(z(k) + beta0_(k));
    const Eigen::RowVectorXd dh = channels_[k].grad_h(x).transpose();
    const BetaTilde bt =
        beta_tilde(channels_[k], barrier_, x, quadrature_, fixed_nodes);
    out.A_z.row(k) = coeff * dh * A + gamma_ * bt.row;
    out.g_z.row(k) = coeff * dh * g;
    out.quadrature_nodes = std::max(out.quadrature_nodes, bt.nodes);
  }
  return out;
}

AugmentedSystem::Matrices AugmentedSystem::evaluate(const VectorXd& xbar,
                                                    int fixed_nodes) const {
  const VectorXd x = xbar.head(n());
  Matrices out;
  out.A_bar = MatrixXd::Zero(n_bar(), n_bar());
  out.g_bar = MatrixXd::Zero(n_bar(), m());
  out.A_bar.topLeftCorner(n(), n()) = base_.A_of_x(x);
  out.g_bar.topRows(n()) = base_.g_of_x(x);
  if (q() > 0) {
    const BarrierSdc sdc = barrier_state_sdc(xbar, fixed_nodes);
    out.A_bar.bottomLeftCorner(q(), n()) = sdc.A_z;
    out.A_bar.bottomRightCorner(q(), q()).diagonal().setConstant(-gamma_);
    out.g_bar.bottomRows(q()) = sdc.g_z;
    out.quadrature_nodes = sdc.quadrature_nodes;
  }
  return out;
}

VectorXd AugmentedSystem::rhs(const VectorXd& xbar, const VectorXd& u) const {
  VectorXd out(n_bar());
  out.head(n()) = base_.rhs(xbar.head(n()), u);
  if (q() > 0) out.tail(q()) = barrier_state_rhs(xbar, u);
  return out;
}

}  // namespace bas_sdre
