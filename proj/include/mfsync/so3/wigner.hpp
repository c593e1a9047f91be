#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "mfsync/core/error.hpp"
#include "mfsync/so3/rotation.hpp"

namespace mfsync::so3 {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr int kMaxWignerDegree = 8;

inline int rep_dimension(int k) { return 2 * k + 1; }

/// SU(2) lift of a unit quaternion. q -> U(q) is a group homomorphism and
/// q, -q give U, -U, which agree on every integer-degree representation.
inline Eigen::Matrix2cd su2_matrix(const Rotation& g) {
  Eigen::Matrix2cd u;
  u << Complex(g.w(), -g.z()), Complex(-g.y(), -g.x()),
       Complex(g.y(), -g.x()), Complex(g.w(), g.z());
  return u;
}

namespace detail {

struct WignerTables {
  std::array<double, 2 * kMaxWignerDegree + 1> factorial{};
  std::array<std::array<double, 2 * kMaxWignerDegree + 1>, 2 * kMaxWignerDegree + 1> binomial{};

  WignerTables() {
    factorial[0] = 1.0;
    for (std::size_t i = 1; i < factorial.size(); ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);
    for (std::size_t n = 0; n < binomial.size(); ++n)
      for (std::size_t s = 0; s <= n; ++s) binomial[n][s] = factorial[n] / (factorial[s] * factorial[n - s]);
  }
};

inline const WignerTables& wigner_tables() {
  static const WignerTables tables;
  return tables;
}

}  // namespace detail

/// The (2k+1)-dimensional irreducible unitary representation of SO(3).
///
/// Realized on homogeneous polynomials of degree 2k in (X, Y) with the
/// orthonormal basis e_m = X^{k+m} Y^{k-m} / sqrt((k+m)! (k-m)!), m = -k..k,
/// acting by (T_U f)(v) = f(v U). Rows and columns are ordered m = -k..k.
inline ComplexMatrix wigner_rep(int k, const Rotation& g) {
  require(k >= 0, ErrorKind::PreconditionViolation, "degree must be nonnegative");
  require(k <= kMaxWignerDegree, ErrorKind::UnsupportedDegree,
          "degree " + std::to_string(k) + " exceeds " + std::to_string(kMaxWignerDegree));
  const int d = rep_dimension(k);
  const int deg = 2 * k;
  const auto& tab = detail::wigner_tables();
  const Eigen::Matrix2cd u = su2_matrix(g);
  const Complex a = u(0, 0), b = u(0, 1), c = u(1, 0), e = u(1, 1);

  // Powers 0..deg of each entry.
  std::vector<Complex> pa(deg + 1), pb(deg + 1), pc(deg + 1), pe(deg + 1);
  pa[0] = pb[0] = pc[0] = pe[0] = Complex(1.0, 0.0);
  for (int s = 1; s <= deg; ++s) {
    pa[s] = pa[s - 1] * a;
    pb[s] = pb[s - 1] * b;
    pc[s] = pc[s - 1] * c;
    pe[s] = pe[s - 1] * e;
  }
  std::vector<double> norm(d);
  for (int m = -k; m <= k; ++m) norm[m + k] = std::sqrt(tab.factorial[k + m] * tab.factorial[k - m]);

  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  for (int m = -k; m <= k; ++m) {
    // e_m(vU) = (aX + cY)^p (bX + eY)^q / norm_m with p = k+m, q = k-m.
    const int p = k + m;
    const int q = k - m;
    for (int s = 0; s <= p; ++s) {
      const Complex left = tab.binomial[p][s] * pa[s] * pc[p - s];
      for (int t = 0; t <= q; ++t) {
        const Complex right = tab.binomial[q][t] * pb[t] * pe[q - t];
        // Contributes to X^{s+t} Y^{deg-s-t}, i.e. m' = s + t - k.
        rho(s + t, m + k) += left * right;
      }
    }
    for (int row = 0; row < d; ++row) rho(row, m + k) *= norm[row] / norm[m + k];
  }
  return rho;
}

/// rho_1, ..., rho_{k_max} of one rotation.
inline std::vector<ComplexMatrix> wigner_reps(int k_max, const Rotation& g) {
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) out.push_back(wigner_rep(k, g));
  return out;
}

/// tr rho_k(g) = sin((k + 1/2) alpha) / sin(alpha / 2) for rotation angle alpha.
inline double character(int k, double alpha) {
  const double half = 0.5 * alpha;
  if (std::abs(std::sin(half)) < 1e-8) return 2.0 * k + 1.0;
  return std::sin((k + 0.5) * alpha) / std::sin(half);
}

/// Unitary C with C rho_1(g) C^* = g.matrix() for every rotation g.
///
/// Found once as the null vector of the intertwining equations at two fixed
/// generic rotations; the common scale is fixed so that C is unitary.
inline const Eigen::Matrix3cd& real_basis_change() {
  static const Eigen::Matrix3cd change = [] {
    const Rotation gens[2] = {Rotation(0.8, 0.1, -0.5, 0.3), Rotation(0.4, -0.7, 0.2, 0.55)};
    Eigen::Matrix<Complex, 18, 9> system = Eigen::Matrix<Complex, 18, 9>::Zero();
    const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
    for (int s = 0; s < 2; ++s) {
      const Eigen::Matrix3cd rho = wigner_rep(1, gens[s]);
      const Eigen::Matrix3cd r = gens[s].matrix().cast<Complex>();
      // vec(C rho - R C) = (rho^T kron I - I kron R) vec(C), column-major vec.
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              system(9 * s + 3 * i + a, 3 * j + b) = rho(j, i) * id(a, b) - id(i, j) * r(a, b);
    }
    Eigen::JacobiSVD<Eigen::Matrix<Complex, 18, 9>> svd(system, Eigen::ComputeFullV);
    const Eigen::Matrix<Complex, 9, 1> null = svd.matrixV().col(8);
    Eigen::Matrix3cd c;
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a) c(a, j) = null(3 * j + a);
    const double scale = std::sqrt((c * c.adjoint()).trace().real() / 3.0);
    c /= scale;
    return c;
  }();
  return change;
}

}  // namespace mfsync::so3
