#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>

#include "mfsync/core/error.hpp"

namespace mfsync {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Dense complex Hermitian matrix. Construction enforces exact Hermitian
/// symmetry (lower triangle mirrors the upper one, real diagonal).
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  /// Validates that `m` is Hermitian up to `tol` relative to its largest
  /// entry, then symmetrizes exactly.
  explicit HermitianMatrix(ComplexMatrix m, double tol = 1e-9) : m_(std::move(m)) {
    require(m_.rows() == m_.cols(), ErrorKind::NotHermitian, "matrix is not square");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    const double skew = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    require(skew <= tol * scale, ErrorKind::NotHermitian,
            "max |H - H*| = " + std::to_string(skew));
    symmetrize_from_upper();
  }

  /// Trusts the upper triangle (including the diagonal) and overwrites the
  /// lower one with its conjugate.
  static HermitianMatrix from_upper(ComplexMatrix m) {
    require(m.rows() == m.cols(), ErrorKind::NotHermitian, "matrix is not square");
    HermitianMatrix h;
    h.m_ = std::move(m);
    h.symmetrize_from_upper();
    return h;
  }

  static HermitianMatrix zero(Eigen::Index n) { return from_upper(ComplexMatrix::Zero(n, n)); }

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& dense() const noexcept { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double frobenius_norm() const { return m_.norm(); }

 private:
  void symmetrize_from_upper() {
    const Eigen::Index n = m_.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
      m_(j, j) = Complex(m_(j, j).real(), 0.0);
      for (Eigen::Index i = j + 1; i < n; ++i) m_(i, j) = std::conj(m_(j, i));
    }
  }

  ComplexMatrix m_;
};

/// Leading eigenpair; `vector` has Euclidean norm sqrt(n).
struct EigenPair {
  double value = 0.0;
  ComplexVector vector;
};

namespace detail {

/// Rotates `v` so that its largest-magnitude entry (first one on ties) is
/// real and positive.
inline void fix_phase(Eigen::Ref<ComplexVector> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs * (1.0 + 1e-12)) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs > 0.0) {
    v *= std::conj(v(best)) / best_abs;
    v(best) = Complex(std::abs(v(best)), 0.0);  // exactly real, not just to rounding
  }
}

inline Eigen::Index default_max_iter(Eigen::Index n) {
  const double nn = static_cast<double>(n);
  return static_cast<Eigen::Index>(10.0 * nn * std::log(std::max(nn, 2.0))) + 1000;
}

/// Rayleigh-quotient iteration polishing of a unit vector; returns the final
/// residual norm.
inline double polish(const ComplexMatrix& h, ComplexVector& v, double& value, double target,
                     Eigen::Index max_iter) {
  double residual = (h * v - value * v).norm();
  for (Eigen::Index it = 0; it < max_iter && residual > target; ++it) {
    ComplexMatrix shifted = h;
    shifted.diagonal().array() -= value;
    ComplexVector w = shifted.partialPivLu().solve(v);
    const double norm = w.norm();
    if (!std::isfinite(norm) || norm == 0.0) break;
    v = w / norm;
    value = (v.adjoint() * h * v)(0).real();
    residual = (h * v - value * v).norm();
  }
  return residual;
}

}  // namespace detail

/// Eigenpair of the algebraically largest eigenvalue of `h`. The vector is
/// scaled to norm sqrt(n) with its largest-magnitude entry real-positive.
/// `tol` is relative to the Frobenius norm of `h`; `max_iter` bounds the
/// Rayleigh-quotient polishing applied when the dense solve alone misses it.
inline EigenPair leading_eigenpair(const HermitianMatrix& h, double tol = 1e-10,
                                   Eigen::Index max_iter = -1) {
  const Eigen::Index n = h.dim();
  require(n > 0, ErrorKind::PreconditionViolation, "empty matrix");
  require(tol > 0.0, ErrorKind::PreconditionViolation, "tol must be positive");
  const double fro = h.frobenius_norm();
  require(fro > 0.0, ErrorKind::ZeroMatrix, "Frobenius norm is zero");
  if (max_iter < 0) max_iter = detail::default_max_iter(n);

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.dense());
  require(solver.info() == Eigen::Success, ErrorKind::NoConvergence, "dense eigensolver failed");
  const auto& values = solver.eigenvalues();
  if (n > 1) {
    require(values(n - 1) - values(n - 2) > tol * fro, ErrorKind::NoConvergence,
            "leading eigenvalue is not simple");
  }
  EigenPair pair;
  pair.value = values(n - 1);
  pair.vector = solver.eigenvectors().col(n - 1);
  const double residual = detail::polish(h.dense(), pair.vector, pair.value, tol * fro, max_iter);
  require(residual <= tol * fro, ErrorKind::NoConvergence,
          "residual " + std::to_string(residual) + " above tolerance");
  detail::fix_phase(pair.vector);
  pair.vector *= std::sqrt(static_cast<double>(n)) / pair.vector.norm();
  return pair;
}

/// Orthonormal basis of the top-d invariant subspace, columns ordered by
/// decreasing eigenvalue, each column phase-fixed like leading_eigenpair.
/// The iteration cap is accepted for interface parity; the dense solve has none.
inline ComplexMatrix top_d_eigenvectors(const HermitianMatrix& h, Eigen::Index d,
                                        double tol = 1e-10, Eigen::Index /*max_iter*/ = -1) {
  const Eigen::Index n = h.dim();
  require(d >= 1 && d <= n, ErrorKind::PreconditionViolation, "need 1 <= d <= n");
  const double fro = h.frobenius_norm();
  require(fro > 0.0, ErrorKind::ZeroMatrix, "Frobenius norm is zero");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.dense());
  require(solver.info() == Eigen::Success, ErrorKind::NoConvergence, "dense eigensolver failed");
  const auto& values = solver.eigenvalues();
  if (d < n) {
    require(values(n - d) - values(n - d - 1) > tol * fro, ErrorKind::NoConvergence,
            "top-" + std::to_string(d) + " subspace is not separated from the rest");
  }
  ComplexMatrix basis(n, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    basis.col(c) = solver.eigenvectors().col(n - 1 - c);
    detail::fix_phase(basis.col(c));
  }
  const double residual = (h.dense() * basis - basis * values.tail(d).reverse().asDiagonal()).norm();
  require(residual <= tol * fro * std::sqrt(static_cast<double>(d)), ErrorKind::NoConvergence,
          "subspace residual " + std::to_string(residual) + " above tolerance");
  return basis;
}

/// Nearest unitary matrix in Frobenius norm: Phi * Psi^* from the SVD
/// M = Phi Sigma Psi^*.
inline ComplexMatrix unitary_projection(const ComplexMatrix& m) {
  require(m.rows() == m.cols() && m.rows() > 0, ErrorKind::PreconditionViolation,
          "unitary_projection needs a nonempty square matrix");
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smallest = svd.singularValues().minCoeff();
  require(smallest > 1e-10, ErrorKind::RankDeficient,
          "smallest singular value " + std::to_string(smallest));
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace mfsync
