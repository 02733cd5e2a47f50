#include "bas_sdre/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "bas_sdre/error.hpp"

namespace bas_sdre {
namespace {

MatrixXd input_weight_gramian(const MatrixXd& g_bar, const MatrixXd& R) {
  return symmetrize(g_bar * R.llt().solve(g_bar.transpose()));
}

struct EntryValues {
  MatrixXd A;
  MatrixXd G;
  MatrixXd Q;
};

EntryValues entries_at(const AugmentedSystem& aug, const CostSpec& cost,
                       const VectorXd& xbar, int nodes) {
  const auto mats = aug.evaluate(xbar, nodes);
  return {mats.A_bar, input_weight_gramian(mats.g_bar, cost.R_of_x(xbar)),
          cost.Q_of_x(xbar)};
}

bool is_domain_error(const Error& e) {
  return e.code() == ErrorCode::kUnsafeState ||
         e.code() == ErrorCode::kSegmentUnsafe ||
         e.code() == ErrorCode::kQuadratureNotConverged;
}

}  // namespace

std::string_view to_string(RoaStatus status) {
  switch (status) {
    case RoaStatus::kCertified: return "Certified";
    case RoaStatus::kNoLevelPassed: return "NoLevelPassed";
    case RoaStatus::kInsufficientSamples: return "InsufficientSamples";
  }
  return "Unknown";
}

FlowDerivatives matrix_flow_derivatives(const AugmentedSystem& aug,
                                        const CostSpec& cost,
                                        const VectorXd& xbar, const VectorXd& v,
                                        int quadrature_nodes) {
  const Eigen::Index nb = aug.n_bar();
  FlowDerivatives out;
  const double speed = v.norm();
  if (!std::isfinite(speed)) {
    throw Error(ErrorCode::kInvalidParams, "closed-loop flow is not finite");
  }
  if (speed == 0.0) {
    out.A_dot = MatrixXd::Zero(nb, nb);
    out.G_dot = MatrixXd::Zero(nb, nb);
    out.Q_dot = MatrixXd::Zero(nb, nb);
    return out;
  }
  const VectorXd dir = v / speed;
  double step = std::max(1e-6, 1e-6 * xbar.norm());
  for (int attempt = 0; attempt <= 4; ++attempt, step *= 0.5) {
    try {
      const EntryValues plus = entries_at(aug, cost, xbar + step * dir, quadrature_nodes);
      const EntryValues minus = entries_at(aug, cost, xbar - step * dir, quadrature_nodes);
      const double scale = speed / (2.0 * step);
      out.A_dot = scale * (plus.A - minus.A);
      out.G_dot = scale * (plus.G - minus.G);
      out.Q_dot = scale * (plus.Q - minus.Q);
      out.step = step;
      return out;
    } catch (const Error& e) {
      if (!is_domain_error(e)) throw;
    }
  }
  throw Error(ErrorCode::kStepOutOfDomain,
              "finite-difference perturbation leaves the safe set");
}

PDotResult compute_p_dot(const AugmentedSystem& aug, const CostSpec& cost,
                         const VectorXd& xbar,
                         const std::optional<FlowDerivativeHook>& hook) {
  const auto mats = aug.evaluate(xbar);
  const MatrixXd Q = cost.Q_of_x(xbar);
  PDotResult out;
  out.G = input_weight_gramian(mats.g_bar, cost.R_of_x(xbar));
  out.riccati = solve_care(mats.A_bar, out.G, Q);
  const MatrixXd& P = out.riccati.P;
  out.A_c = mats.A_bar - out.G * P;
  const VectorXd v = out.A_c * xbar;

  const FlowDerivatives d =
      hook ? hook->evaluate(xbar, v)
           : matrix_flow_derivatives(aug, cost, xbar, v, mats.quadrature_nodes);
  out.Q_tilde = P * d.A_dot + d.A_dot.transpose() * P - P * d.G_dot * P + d.Q_dot;

  const LyapunovSolution kron =
      solve_lyapunov(out.A_c, out.Q_tilde, LyapunovBackend::kKronecker);
  const LyapunovSolution bs =
      solve_lyapunov(out.A_c, out.Q_tilde, LyapunovBackend::kBartelsStewart);
  out.backend_disagreement =
      (kron.X - bs.X).norm() / std::max(1.0, kron.X.norm());
  out.P_dot = symmetrize(aug.n_bar() > 8 ? bs.X : kron.X);
  out.lyapunov_residual =
      (out.P_dot * out.A_c + out.A_c.transpose() * out.P_dot + out.Q_tilde).norm();
  return out;
}

CertificateReport check_condition(const AugmentedSystem& aug,
                                  const CostSpec& cost, const VectorXd& xbar,
                                  const std::optional<FlowDerivativeHook>& hook) {
  const PDotResult pd = compute_p_dot(aug, cost, xbar, hook);
  const MatrixXd& P = pd.riccati.P;
  const MatrixXd Q_hat_raw = cost.Q_of_x(xbar) - pd.P_dot;

  CertificateReport r;
  r.P_dot = pd.P_dot;
  r.asymmetry = (Q_hat_raw - Q_hat_raw.transpose()).norm();
  r.asymmetry_warning = r.asymmetry > 1e-8;
  const MatrixXd Q_hat = symmetrize(Q_hat_raw);
  r.min_eig_Q_hat =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(Q_hat, Eigen::EigenvaluesOnly)
          .eigenvalues()(0);
  r.W = xbar.dot(P * xbar);
  r.xQx_hat = xbar.dot(Q_hat * xbar);
  r.W_dot = -r.xQx_hat - xbar.dot(P * pd.G * P * xbar);
  r.condition_holds = r.min_eig_Q_hat > 0.0;
  return r;
}

RoaEstimate estimate_roa(const AugmentedSystem& aug, const CostSpec& cost,
                         std::vector<double> c_grid, std::size_t sample_budget,
                         const RoaSampling& sampling) {
  RoaEstimate est;
  est.first_failure_W = std::numeric_limits<double>::infinity();
  if (sample_budget == 0 || c_grid.empty()) return est;

  std::mt19937_64 rng(sampling.seed);
  const int n = aug.n();
  std::vector<std::uniform_real_distribution<double>> dists;
  for (int i = 0; i < n; ++i) dists.emplace_back(sampling.lo(i), sampling.hi(i));

  const std::size_t max_attempts =
      sample_budget * static_cast<std::size_t>(std::max(1, sampling.max_attempts_factor));
  for (std::size_t attempt = 0;
       attempt < max_attempts && est.samples < sample_budget; ++attempt) {
    VectorXd xbar(aug.n_bar());
    for (int i = 0; i < n; ++i) xbar(i) = dists[i](rng);
    try {
      xbar.tail(aug.q()) = aug.consistent_barrier_state(xbar.head(n));
      const CertificateReport r = check_condition(aug, cost, xbar);
      ++est.samples;
      est.max_sampled_W = std::max(est.max_sampled_W, r.W);
      if (!r.condition_holds) {
        ++est.failed_samples;
        est.first_failure_W = std::min(est.first_failure_W, r.W);
      }
    } catch (const Error&) {
      // Unsafe points, unsafe chords and failed solves are outside the
      // operating domain and do not count as samples.
    }
  }
  if (est.samples == 0) return est;

  std::sort(c_grid.begin(), c_grid.end());
  est.status = RoaStatus::kNoLevelPassed;
  for (double c : c_grid) {
    if (c > est.max_sampled_W || !(c < est.first_failure_W)) break;
    est.c = c;
    est.status = RoaStatus::kCertified;
  }
  return est;
}

}  // namespace bas_sdre
