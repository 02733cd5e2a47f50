#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace bas_sdre {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct RiccatiSolution {
  MatrixXd P;
  /// Frobenius norm of P A + Aᵀ P − P G P + Q.
  double residual_norm = 0.0;
  Eigen::VectorXcd closed_loop_eigs;
  double min_eig_P = 0.0;
  /// Number of Newton–Kleinman refinement steps applied after the Schur solve.
  int newton_steps = 0;
};

struct CareOptions {
  /// Newton polishing targets ‖res‖_F ≤ tol · max(1, ‖Q‖_F). A solution is
  /// accepted when ‖res‖_F ≤ tol · max(1, ‖Q‖ + 2‖A‖‖P‖ + ‖G‖‖P‖²).
  double residual_tolerance = 1e-8;
  /// Closed-loop eigenvalues must satisfy Re(λ) < −hurwitz_margin.
  double hurwitz_margin = 1e-9;
  /// Condition number bound on the stable-subspace basis block.
  double max_basis_condition = 1e12;
  int max_newton_steps = 8;
  /// Skip the Schur step and run Newton–Kleinman from this seed. The seed
  /// must be stabilizing; if it is not, the solver falls back to Schur.
  std::optional<MatrixXd> warm_start;
};

/// Stabilizing solution of P A + Aᵀ P − P G P + Q = 0.
///
/// The stable invariant subspace of the Hamiltonian [[A, −G], [−Q, −Aᵀ]] is
/// extracted with an ordered real Schur decomposition (LAPACK dgees). If the residual
/// misses the tolerance the result is polished by Newton–Kleinman.
///
/// Throws Error(kNoStabilizingSolution) or Error(kIllConditioned).
RiccatiSolution solve_care(const MatrixXd& A, const MatrixXd& G,
                           const MatrixXd& Q, const CareOptions& options = {});

/// ‖P A + Aᵀ P − P G P + Q‖_F, accumulated in extended precision.
double care_residual(const MatrixXd& A, const MatrixXd& G, const MatrixXd& Q,
                     const MatrixXd& P);

enum class LyapunovBackend { kAuto, kKronecker, kBartelsStewart };

struct LyapunovSolution {
  MatrixXd X;
  /// Frobenius norm of X A + Aᵀ X + C.
  double residual_norm = 0.0;
  LyapunovBackend backend = LyapunovBackend::kAuto;
};

/// Solves X A + Aᵀ X + C = 0. kAuto uses the Kronecker-sum system for
/// n ≤ 8 and Bartels–Stewart above.
///
/// Throws Error(kSingularOperator) when some pair of eigenvalues of A sums
/// to (numerically) zero.
LyapunovSolution solve_lyapunov(const MatrixXd& A, const MatrixXd& C,
                                LyapunovBackend backend = LyapunovBackend::kAuto);

struct StabilizabilityReport {
  bool stabilizable = true;
  /// First eigenvalue with Re(λ) ≥ 0 whose PBH rank test failed.
  std::optional<std::complex<double>> offending_eigenvalue;
  /// rank([A − λI, B]) at the offending eigenvalue (n when none failed).
  Eigen::Index rank = 0;
};

/// PBH test over the eigenvalues of A with non-negative real part.
StabilizabilityReport check_stabilizability(const MatrixXd& A,
                                            const MatrixXd& B);

/// Detectability of (A, C) as stabilizability of (Aᵀ, Cᵀ).
StabilizabilityReport check_detectability(const MatrixXd& A, const MatrixXd& C);

double max_real_part(const Eigen::VectorXcd& eigs);

inline MatrixXd symmetrize(const MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

}  // namespace bas_sdre
