#include "bas_sdre/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "bas_sdre/error.hpp"

namespace bas_sdre {
namespace {

extern "C" {
using lapack_select2 = int (*)(const double*, const double*);
void dgees_(const char* jobvs, const char* sort, lapack_select2 select, const int* n,
            double* a, const int* lda, int* sdim, double* wr, double* wi, double* vs,
            const int* ldvs, double* work, const int* lwork, int* bwork, int* info,
            std::size_t jobvs_len, std::size_t sort_len);
}

int select_open_left_half(const double* re, const double* /*im*/) { return *re < 0.0 ? 1 : 0; }

MatrixXd schur_care(const MatrixXd& A, const MatrixXd& G, const MatrixXd& Q,
                    const CareOptions& options) {
  const int n = static_cast<int>(A.rows());
  const int n2 = 2 * n;
  if (n == 0) return MatrixXd(0, 0);
  MatrixXd H(n2, n2);
  H << A, -G, -Q, -A.transpose();

  // Ordered real Schur form: eigenvalues with negative real part lead.
  MatrixXd T = H;
  MatrixXd U(n2, n2);
  Eigen::VectorXd wr(n2), wi(n2);
  std::vector<int> bwork(static_cast<std::size_t>(n2));
  int sdim = 0;
  int info = 0;
  int lwork = -1;
  double work_query = 0.0;
  dgees_("V", "S", select_open_left_half, &n2, T.data(), &n2, &sdim, wr.data(), wi.data(),
         U.data(), &n2, &work_query, &lwork, bwork.data(), &info, 1, 1);
  lwork = std::max(1, static_cast<int>(work_query));
  std::vector<double> work(static_cast<std::size_t>(lwork));
  dgees_("V", "S", select_open_left_half, &n2, T.data(), &n2, &sdim, wr.data(), wi.data(),
         U.data(), &n2, work.data(), &lwork, bwork.data(), &info, 1, 1);
  if (info != 0 && info != n2 + 2) {
    throw Error(ErrorCode::kNoStabilizingSolution,
                "Schur decomposition of the Hamiltonian failed (info " +
                    std::to_string(info) + ")");
  }

  const double axis_tol = 1e-13 * std::max(1.0, H.norm());
  Eigen::Index stable = 0;
  for (Eigen::Index i = 0; i < n2; ++i) {
    if (std::abs(wr(i)) <= axis_tol) {
      throw Error(ErrorCode::kNoStabilizingSolution,
                  "Hamiltonian has an eigenvalue on the imaginary axis");
    }
    if (wr(i) < 0.0) ++stable;
  }
  if (stable != n || sdim != n) {
    throw Error(ErrorCode::kNoStabilizingSolution,
                "stable subspace has dimension " + std::to_string(stable) +
                    ", expected " + std::to_string(n));
  }

  const MatrixXd U11 = U.topLeftCorner(n, n);
  const MatrixXd U21 = U.bottomLeftCorner(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(U11);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(n - 1);
  if (!(smin > std::numeric_limits<double>::epsilon() * smax)) {
    throw Error(ErrorCode::kNoStabilizingSolution,
                "stable-subspace basis block is singular");
  }
  if (smax / smin > options.max_basis_condition) {
    throw Error(ErrorCode::kIllConditioned,
                "stable-subspace basis block condition number " +
                    std::to_string(smax / smin));
  }
  // P U11 = U21.
  const MatrixXd P = U11.transpose().partialPivLu().solve(U21.transpose()).transpose();
  return symmetrize(P);
}

bool is_hurwitz(const MatrixXd& M, double margin) {
  if (M.size() == 0) return true;
  return max_real_part(M.eigenvalues()) < -margin;
}

// P A + Aᵀ P − P G P + Q accumulated in extended precision; the three terms
// cancel heavily when P is large.
MatrixXd residual_matrix(const MatrixXd& A, const MatrixXd& G, const MatrixXd& Q,
                         const MatrixXd& P) {
  using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const MatrixXld Pl = P.cast<long double>();
  const MatrixXld Al = A.cast<long double>();
  const MatrixXld PA = Pl * Al;
  const MatrixXld R = PA + PA.transpose() - Pl * G.cast<long double>() * Pl + Q.cast<long double>();
  return R.cast<double>();
}

// One Newton–Kleinman step in correction form: with R the residual at P,
// solve Δ (A − G P) + (A − G P)ᵀ Δ + R = 0 and return P + Δ.
MatrixXd newton_step(const MatrixXd& A, const MatrixXd& G, const MatrixXd& Q,
                     const MatrixXd& P) {
  const MatrixXd Ac = A - G * P;
  return symmetrize(P + solve_lyapunov(Ac, symmetrize(residual_matrix(A, G, Q, P))).X);
}

}  // namespace

double max_real_part(const Eigen::VectorXcd& eigs) {
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eigs.size(); ++i) m = std::max(m, eigs(i).real());
  return m;
}

double care_residual(const MatrixXd& A, const MatrixXd& G, const MatrixXd& Q,
                     const MatrixXd& P) {
  return residual_matrix(A, G, Q, P).norm();
}

RiccatiSolution solve_care(const MatrixXd& A, const MatrixXd& G,
                           const MatrixXd& Q, const CareOptions& options) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || G.rows() != n || G.cols() != n || Q.rows() != n ||
      Q.cols() != n) {
    throw Error(ErrorCode::kInvalidParams, "solve_care: dimension mismatch");
  }
  if (!A.allFinite() || !G.allFinite() || !Q.allFinite()) {
    throw Error(ErrorCode::kInvalidParams, "solve_care: non-finite input");
  }
  const double tol = options.residual_tolerance * std::max(1.0, Q.norm());

  RiccatiSolution sol;
  bool have = false;
  if (options.warm_start && options.warm_start->rows() == n &&
      is_hurwitz(A - G * *options.warm_start, options.hurwitz_margin)) {
    MatrixXd P = symmetrize(*options.warm_start);
    int steps = 0;
    double res = care_residual(A, G, Q, P);
    while (res > tol && steps < options.max_newton_steps) {
      try {
        P = newton_step(A, G, Q, P);
      } catch (const Error&) {
        break;
      }
      ++steps;
      res = care_residual(A, G, Q, P);
    }
    if (res <= tol) {
      sol.P = P;
      sol.newton_steps = steps;
      have = true;
    }
  }

  if (!have) {
    sol.P = schur_care(A, G, Q, options);
    double res = care_residual(A, G, Q, sol.P);
    while (res > tol && sol.newton_steps < options.max_newton_steps) {
      if (!is_hurwitz(A - G * sol.P, 0.0)) break;
      MatrixXd next = newton_step(A, G, Q, sol.P);
      const double next_res = care_residual(A, G, Q, next);
      if (!(next_res < res)) break;
      sol.P = std::move(next);
      res = next_res;
      ++sol.newton_steps;
    }
  }

  sol.residual_norm = care_residual(A, G, Q, sol.P);
  sol.closed_loop_eigs = (A - G * sol.P).eigenvalues();
  sol.min_eig_P = n == 0 ? 0.0
                         : Eigen::SelfAdjointEigenSolver<MatrixXd>(
                               sol.P, Eigen::EigenvaluesOnly)
                               .eigenvalues()(0);
  // Accept at the rounding floor of the three terms when P is large.
  const double p_norm = sol.P.norm();
  const double accept_tol =
      options.residual_tolerance *
      std::max(1.0, Q.norm() + 2.0 * A.norm() * p_norm + G.norm() * p_norm * p_norm);
  if (!(sol.residual_norm <= accept_tol)) {
    throw Error(ErrorCode::kNoStabilizingSolution,
                fmt::format("Riccati residual {:.3e} exceeds tolerance {:.3e}",
                            sol.residual_norm, accept_tol));
  }
  if (n > 0 && !(max_real_part(sol.closed_loop_eigs) < -options.hurwitz_margin)) {
    throw Error(ErrorCode::kNoStabilizingSolution,
                "closed loop is not Hurwitz (max Re = " +
                    std::to_string(max_real_part(sol.closed_loop_eigs)) + ")");
  }
  return sol;
}

}  // namespace bas_sdre
