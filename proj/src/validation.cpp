#include "bas_sdre/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bas_sdre/certificate.hpp"
#include "bas_sdre/error.hpp"

namespace bas_sdre {
namespace {

VectorXd draw(std::mt19937_64& rng, const ValidationBox& box) {
  VectorXd x(box.lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) = std::uniform_real_distribution<double>(box.lo(i), box.hi(i))(rng);
  }
  return x;
}

}  // namespace

ValidationBox default_box(const SdcSystem& sys) {
  ValidationBox box;
  if (sys.n == 6) {
    box.lo.resize(6);
    box.hi.resize(6);
    box.lo << -5, -5, -std::numbers::pi, -3, -3, -3;
    box.hi << 5, 5, std::numbers::pi, 3, 3, 3;
  } else {
    box.lo = VectorXd::Constant(sys.n, -5.0);
    box.hi = VectorXd::Constant(sys.n, 5.0);
  }
  return box;
}

std::vector<CheckResult> validate_model(const Scenario& scenario,
                                        std::size_t samples, std::uint64_t seed,
                                        const ValidationBox& box) {
  const AugmentedSystem& aug = *scenario.model;
  const SdcSystem& sys = aug.base();
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  {
    std::vector<VectorXd> xs;
    for (std::size_t i = 0; i < samples; ++i) xs.push_back(draw(rng, box));
    const FactorizationReport rep = validate_factorization(sys, xs);
    out.push_back({"factorization", rep.max_relative_error, 1e-8, rep.samples, rep.passed});
  }

  CheckResult grad{"gradient", 0.0, 1e-6, 0, true};
  for (std::size_t i = 0; i < samples; ++i) {
    const VectorXd x = draw(rng, box);
    if (!(scenario.monitor.min_margin(x) > 0.0)) continue;
    for (const auto& c : scenario.monitor.constraints) {
      const VectorXd g = c.grad_h(x);
      VectorXd fd(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double step = 1e-6 * std::max(1.0, std::abs(x(j)));
        VectorXd xp = x, xm = x;
        xp(j) += step;
        xm(j) -= step;
        fd(j) = (c.h(xp) - c.h(xm)) / (2.0 * step);
      }
      grad.max_error = std::max(grad.max_error, (g - fd).norm() / std::max(1.0, g.norm()));
    }
    ++grad.samples;
  }
  grad.passed = grad.max_error <= grad.tolerance;
  out.push_back(grad);

  if (aug.q() == 0) return out;

  CheckResult bt{"beta_tilde", 0.0, 1e-7, 0, true};
  CheckResult sdc{"bas_sdc", 0.0, 1e-7, 0, true};
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t attempt = 0; bt.samples < samples && attempt < 100 * samples;
       ++attempt) {
    const VectorXd x = draw(rng, box);
    if (!(scenario.monitor.min_margin(x) > 0.0) ||
        !chord_is_safe(scenario.monitor, x)) {
      continue;
    }
    VectorXd xbar(aug.n_bar());
    xbar.head(aug.n()) = x;
    try {
      const VectorXd z = aug.consistent_barrier_state(x);
      const VectorXd beta = aug.beta(x);
      const auto channels = aug.safety().channels();
      for (int k = 0; k < aug.q(); ++k) {
        const BetaTilde b = beta_tilde(channels[k], aug.barrier(), x, aug.quadrature());
        const double lhs = b.row.dot(x);
        const double rhs = beta(k) - aug.beta0()(k);
        bt.max_error = std::max(bt.max_error, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      }
      ++bt.samples;

      // Barrier states perturbed off the consistent manifold and a random input.
      for (int k = 0; k < aug.q(); ++k) {
        xbar(aug.n() + k) = z(k) * (1.0 + 0.1 * noise(rng)) + 0.01 * noise(rng);
      }
      VectorXd u(aug.m());
      for (int j = 0; j < aug.m(); ++j) u(j) = 2.0 * noise(rng);
      const auto bsdc = aug.barrier_state_sdc(xbar);
      const VectorXd zdot_sdc =
          bsdc.A_z * x + bsdc.g_z * u - aug.gamma() * xbar.tail(aug.q());
      const VectorXd zdot = aug.barrier_state_rhs(xbar, u);
      for (int k = 0; k < aug.q(); ++k) {
        sdc.max_error = std::max(sdc.max_error, std::abs(zdot_sdc(k) - zdot(k)) /
                                                    std::max(1.0, std::abs(zdot(k))));
      }
      ++sdc.samples;
    } catch (const Error&) {
      continue;
    }
  }
  bt.passed = bt.samples > 0 && bt.max_error <= bt.tolerance;
  sdc.passed = sdc.samples > 0 && sdc.max_error <= sdc.tolerance;
  out.push_back(bt);
  out.push_back(sdc);
  return out;
}

CertifyResult certify_trajectory(const Scenario& scenario, Trajectory& traj) {
  const AugmentedSystem& aug = *scenario.model;
  if (traj.n != aug.n() || traj.q != aug.q()) {
    throw Error(ErrorCode::kDataFormat,
                "trajectory dimensions do not match the scenario model");
  }
  CertifyResult res;
  res.min_eig = std::numeric_limits<double>::infinity();
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  if (traj.xQx_hat.size() != traj.size()) traj.xQx_hat.assign(traj.size(), kNaN);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (!traj.xbar[i].allFinite()) continue;
    try {
      const CertificateReport r =
          check_condition(aug, scenario.augmented_cost, traj.xbar[i]);
      traj.W[i] = r.W;
      traj.W_dot[i] = r.W_dot;
      traj.min_eig_Q_hat[i] = r.min_eig_Q_hat;
      traj.xQx_hat[i] = r.xQx_hat;
      ++res.evaluated;
      if (r.condition_holds) ++res.certified;
      res.min_eig = std::min(res.min_eig, r.min_eig_Q_hat);
    } catch (const Error&) {
      ++res.failed_evaluations;
    }
  }
  return res;
}

}  // namespace bas_sdre
