#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "bas_sdre/error.hpp"
#include "bas_sdre/riccati.hpp"

namespace bas_sdre {
namespace {

using Eigen::MatrixXcd;

constexpr double kSingularTolerance = 1e-13;

// vec(X A + Aᵀ X) = (Aᵀ ⊗ I + I ⊗ Aᵀ) vec(X), column-major vec.
MatrixXd kronecker_sum_operator(const MatrixXd& A) {
  const Eigen::Index n = A.rows();
  const MatrixXd At = A.transpose();
  MatrixXd K = MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // (Aᵀ ⊗ I): block (i, j) is Aᵀ(i, j)·I.
      K.block(i * n, j * n, n, n).diagonal().array() += At(i, j);
    }
    // (I ⊗ Aᵀ): block-diagonal copies of Aᵀ.
    K.block(i * n, i * n, n, n) += At;
  }
  return K;
}

MatrixXd solve_kronecker(const MatrixXd& A, const MatrixXd& C) {
  const Eigen::Index n = A.rows();
  const Eigen::VectorXcd eigs = A.eigenvalues();
  const double scale = std::max(1.0, eigs.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (std::abs(eigs(i) + eigs(j)) <= 1e-12 * scale) {
        throw Error(ErrorCode::kSingularOperator, "eigenvalue pair of A sums to zero");
      }
    }
  }
  const MatrixXd K = kronecker_sum_operator(A);
  Eigen::PartialPivLU<MatrixXd> lu(K);
  if (!(lu.rcond() > kSingularTolerance)) {
    throw Error(ErrorCode::kSingularOperator,
                "Kronecker-sum operator is numerically singular");
  }
  const VectorXd rhs = -Eigen::Map<const VectorXd>(C.data(), n * n);
  const VectorXd x = lu.solve(rhs);
  return Eigen::Map<const MatrixXd>(x.data(), n, n);
}

// With M = Aᵀ = U T Uᴴ the equation becomes T Y + Y Tᴴ = −Uᴴ C U, X = U Y Uᴴ.
MatrixXd solve_bartels_stewart(const MatrixXd& A, const MatrixXd& C) {
  const Eigen::Index n = A.rows();
  Eigen::ComplexSchur<MatrixXcd> schur(A.transpose().cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularOperator, "Schur decomposition failed");
  }
  const MatrixXcd& T = schur.matrixT();
  const MatrixXcd& U = schur.matrixU();
  const MatrixXcd F = -(U.adjoint() * C.cast<std::complex<double>>() * U);

  const double scale = std::max(1.0, T.norm());
  MatrixXcd Y(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = F.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
    MatrixXcd shifted = T;
    shifted.diagonal().array() += std::conj(T(j, j));
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(shifted(i, i)) <= kSingularTolerance * scale) {
        throw Error(ErrorCode::kSingularOperator,
                    "eigenvalue pair of A sums to zero");
      }
    }
    Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (U * Y * U.adjoint()).real();
}

}  // namespace

LyapunovSolution solve_lyapunov(const MatrixXd& A, const MatrixXd& C,
                                LyapunovBackend backend) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || C.rows() != n || C.cols() != n) {
    throw Error(ErrorCode::kInvalidParams, "solve_lyapunov: dimension mismatch");
  }
  if (backend == LyapunovBackend::kAuto) {
    backend = n > 8 ? LyapunovBackend::kBartelsStewart : LyapunovBackend::kKronecker;
  }
  LyapunovSolution sol;
  sol.backend = backend;
  if (n == 0) {
    sol.X = MatrixXd(0, 0);
    return sol;
  }
  sol.X = backend == LyapunovBackend::kKronecker ? solve_kronecker(A, C)
                                                 : solve_bartels_stewart(A, C);
  if (C.isApprox(C.transpose(), 1e-14)) sol.X = symmetrize(sol.X);
  sol.residual_norm = (sol.X * A + A.transpose() * sol.X + C).norm();
  return sol;
}

StabilizabilityReport check_stabilizability(const MatrixXd& A,
                                            const MatrixXd& B) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n) {
    throw Error(ErrorCode::kInvalidParams,
                "check_stabilizability: dimension mismatch");
  }
  StabilizabilityReport report;
  report.rank = n;
  if (n == 0) return report;
  const Eigen::VectorXcd eigs = A.eigenvalues();
  const double scale = std::max({1.0, A.norm(), B.norm()});
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    const std::complex<double> lambda = eigs(i);
    if (lambda.real() < 0.0) continue;
    MatrixXcd pbh(n, n + B.cols());
    pbh.leftCols(n) = A.cast<std::complex<double>>() -
                      lambda * MatrixXcd::Identity(n, n);
    pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<MatrixXcd> svd(pbh);
    svd.setThreshold(1e-10 * scale / svd.singularValues()(0));
    const Eigen::Index rank = svd.rank();
    if (rank < n) {
      report.stabilizable = false;
      report.offending_eigenvalue = lambda;
      report.rank = rank;
      return report;
    }
  }
  return report;
}

StabilizabilityReport check_detectability(const MatrixXd& A, const MatrixXd& C) {
  return check_stabilizability(A.transpose(), C.transpose());
}

}  // namespace bas_sdre
