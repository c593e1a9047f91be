#pragma once

// Reference implementations that share no code with the library. They are
// slow and simple on purpose.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
using CMat = std::vector<std::vector<cd>>;
using RMat = std::vector<std::vector<double>>;

struct Eigen {
  std::vector<double> values;            // ascending
  std::vector<std::vector<cd>> vectors;  // vectors[c] pairs with values[c]
};

// Cyclic Jacobi on a real symmetric matrix. Returns eigenvalues ascending and
// eigenvectors as columns of v.
inline void jacobi_real(RMat a, std::vector<double>& values, RMat& v) {
  const std::size_t n = a.size();
  v.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] < a[y][y]; });
  values.resize(n);
  RMat sorted(n, std::vector<double>(n));
  for (std::size_t c = 0; c < n; ++c) {
    values[c] = a[order[c]][order[c]];
    for (std::size_t r = 0; r < n; ++r) sorted[r][c] = v[r][order[c]];
  }
  v = std::move(sorted);
}

// Complex Hermitian eigenproblem through the real embedding
// [[Re, -Im], [Im, Re]], whose spectrum is the complex one doubled.
inline Eigen hermitian_eigen(const CMat& h) {
  const std::size_t n = h.size();
  RMat a(2 * n, std::vector<double>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = h[i][j].real();
      a[i + n][j + n] = h[i][j].real();
      a[i][j + n] = -h[i][j].imag();
      a[i + n][j] = h[i][j].imag();
    }
  }
  std::vector<double> values;
  RMat v;
  jacobi_real(a, values, v);
  Eigen out;
  // Each complex eigenvalue shows up twice; keep every other one.
  for (std::size_t c = 0; c < 2 * n; c += 2) {
    out.values.push_back(0.5 * (values[c] + values[c + 1]));
    std::vector<cd> vec(n);
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      vec[r] = cd(v[r][c], v[r + n][c]);
      norm += std::norm(vec[r]);
    }
    norm = std::sqrt(norm);
    for (auto& x : vec) x /= norm;
    out.vectors.push_back(vec);
  }
  return out;
}

inline CMat random_hermitian(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  CMat h(n, std::vector<cd>(n));
  for (std::size_t i = 0; i < n; ++i) {
    h[i][i] = normal(gen);
    for (std::size_t j = i + 1; j < n; ++j) {
      h[i][j] = cd(normal(gen), normal(gen));
      h[j][i] = std::conj(h[i][j]);
    }
  }
  return h;
}

// sum_{k=-m}^{m} cos(k x)
inline double dirichlet_sum(int m, double x) {
  double s = 0.0;
  for (int k = -m; k <= m; ++k) s += std::cos(k * x);
  return s;
}

// Re sum_k c_k e^{-i k phi}
inline double periodogram_at(const std::vector<cd>& c, double phi) {
  cd s = 0.0;
  for (std::size_t k = 1; k <= c.size(); ++k) s += c[k - 1] * std::polar(1.0, -static_cast<double>(k) * phi);
  return s.real();
}

// Brute-force argmax of |periodogram| on a fine grid.
inline double fine_grid_peak(const std::vector<cd>& c, int grid) {
  double best = -1.0, where = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double phi = 2.0 * std::numbers::pi * g / grid;
    const double v = std::abs(periodogram_at(c, phi));
    if (v > best) {
      best = v;
      where = phi;
    }
  }
  return where;
}

// Distance on the circle.
inline double circle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

}  // namespace oracle
