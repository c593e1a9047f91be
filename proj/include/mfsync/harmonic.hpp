#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfsync/core/error.hpp"

namespace mfsync {

using Complex = std::complex<double>;

inline constexpr int kDefaultGridSize = 4096;

/// Trigonometric moments c_1..c_{k_max}; index 0 holds c_1.
class TrigMomentSeries {
 public:
  TrigMomentSeries() = default;
  explicit TrigMomentSeries(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {
    for (std::size_t k = 0; k < c_.size(); ++k) {
      require(std::isfinite(c_[k].real()) && std::isfinite(c_[k].imag()), ErrorKind::PreconditionViolation,
              "coefficient " + std::to_string(k + 1) + " is not finite");
    }
  }

  /// c_k = e^{i k theta}, the moments of a point mass at theta.
  static TrigMomentSeries clean(double theta, int k_max) {
    std::vector<Complex> c(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) c[static_cast<std::size_t>(k - 1)] = std::polar(1.0, k * theta);
    return TrigMomentSeries(std::move(c));
  }

  int k_max() const noexcept { return static_cast<int>(c_.size()); }
  /// c_k, 1-based.
  Complex operator[](int k) const { return c_[static_cast<std::size_t>(k - 1)]; }
  const std::vector<Complex>& coeffs() const noexcept { return c_; }

  /// Re sum_k c_k e^{-i k phi}, evaluated directly.
  double value_at(double phi) const {
    double acc = 0.0;
    const Complex step = std::polar(1.0, -phi);
    Complex w = step;
    for (std::size_t k = 0; k < c_.size(); ++k) {
      acc += c_[k].real() * w.real() - c_[k].imag() * w.imag();
      w = Complex(w.real() * step.real() - w.imag() * step.imag(), w.real() * step.imag() + w.imag() * step.real());
      if ((k & 31u) == 31u) w = std::polar(1.0, -static_cast<double>(k + 2) * phi);
    }
    return acc;
  }

 private:
  std::vector<Complex> c_;
};

/// Samples of phi -> Re sum_k c_k e^{-i k phi} on phi_g = 2 pi g / G.
struct Periodogram {
  int grid_size = 0;
  std::vector<double> values;

  double angle(int g) const { return 2.0 * std::numbers::pi * g / grid_size; }
};

/// Dir_m(x) = sin((m + 1/2) x) / sin(x / 2) = sum_{|k| <= m} e^{i k x}.
inline double dirichlet(int m, double x) {
  require(m >= 1, ErrorKind::PreconditionViolation, "Dirichlet order must be >= 1");
  const double r = std::remainder(x, 2.0 * std::numbers::pi);
  const double order = 2.0 * m + 1.0;
  if (r == 0.0) return order;
  if (std::abs(r) < 1e-6) {
    const double mm = static_cast<double>(m);
    return order * (1.0 - mm * (mm + 1.0) * r * r / 6.0);
  }
  return std::sin((m + 0.5) * r) / std::sin(0.5 * r);
}

inline double soft_threshold(double x, double tau) {
  const double shrunk = std::abs(x) - tau;
  if (shrunk <= 0.0) return 0.0;
  return std::copysign(shrunk, x);
}

/// Radix-2 decimation-in-time FFT computing A[g] = sum_m a[m] e^{-2 pi i m g / G}.
/// Twiddles are evaluated directly (not by recurrence) to keep the transform
/// within a few ulps of direct summation.
class FftPlan {
 public:
  explicit FftPlan(std::size_t size) : size_(size), twiddle_(size / 2), bitrev_(size) {
    require(is_power_of_two(size), ErrorKind::PreconditionViolation, "FFT size must be a power of two");
    for (std::size_t m = 0; m < size / 2; ++m) {
      twiddle_[m] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(size));
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < size) ++bits;
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      bitrev_[i] = r;
    }
  }

  static bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

  std::size_t size() const noexcept { return size_; }

  void forward(std::vector<Complex>& a) const {
    for (std::size_t i = 0; i < size_; ++i)
      if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
    // Plain real arithmetic: std::complex multiplication carries NaN recovery
    // branches that dominate the butterfly cost.
    double* data = reinterpret_cast<double*>(a.data());
    for (std::size_t len = 2; len <= size_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = size_ / len;
      for (std::size_t start = 0; start < size_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const Complex w = twiddle_[j * stride];
          double* lo = data + 2 * (start + j);
          double* hi = data + 2 * (start + j + half);
          const double tr = w.real() * hi[0] - w.imag() * hi[1];
          const double ti = w.real() * hi[1] + w.imag() * hi[0];
          hi[0] = lo[0] - tr;
          hi[1] = lo[1] - ti;
          lo[0] += tr;
          lo[1] += ti;
        }
      }
    }
  }

 private:
  std::size_t size_;
  std::vector<Complex> twiddle_;
  std::vector<std::size_t> bitrev_;
};

namespace detail {

inline const FftPlan& cached_plan(std::size_t size) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[size];
  if (!slot) slot = std::make_unique<FftPlan>(size);
  return *slot;
}

inline const std::vector<Complex>& cached_roots(std::size_t size) {
  thread_local std::unordered_map<std::size_t, std::vector<Complex>> cache;
  auto& roots = cache[size];
  if (roots.empty()) {
    roots.resize(size);
    for (std::size_t m = 0; m < size; ++m)
      roots[m] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(size));
  }
  return roots;
}

/// Whether an FFT of size G is cheaper than direct O(G * k_max) summation.
inline bool prefer_fft(std::size_t grid, int k_max) {
  if (!FftPlan::is_power_of_two(grid)) return false;
  std::size_t log2g = 0;
  while ((std::size_t{1} << log2g) < grid) ++log2g;
  return static_cast<std::size_t>(k_max) > 2 * log2g;
}

inline void check_grid(int grid_size, int k_max) {
  require(grid_size >= 4 * std::max(k_max, 1), ErrorKind::GridTooCoarse,
          "grid size " + std::to_string(grid_size) + " < 4 * k_max (" + std::to_string(k_max) + ")");
}

}  // namespace detail

/// Direct summation of the periodogram; the reference path.
inline Periodogram evaluate_periodogram_direct(const TrigMomentSeries& series, int grid_size) {
  detail::check_grid(grid_size, series.k_max());
  const auto g_size = static_cast<std::size_t>(grid_size);
  const auto& roots = detail::cached_roots(g_size);
  Periodogram pg{grid_size, std::vector<double>(g_size, 0.0)};
  const auto& c = series.coeffs();
  for (std::size_t g = 0; g < g_size; ++g) {
    double acc = 0.0;
    std::size_t idx = 0;
    for (std::size_t k = 1; k <= c.size(); ++k) {
      idx += g;
      if (idx >= g_size) idx -= g_size;
      acc += c[k - 1].real() * roots[idx].real() - c[k - 1].imag() * roots[idx].imag();
    }
    pg.values[g] = acc;
  }
  return pg;
}

inline Periodogram evaluate_periodogram(const TrigMomentSeries& series, int grid_size) {
  detail::check_grid(grid_size, series.k_max());
  const auto g_size = static_cast<std::size_t>(grid_size);
  if (!detail::prefer_fft(g_size, series.k_max())) return evaluate_periodogram_direct(series, grid_size);
  std::vector<Complex> a(g_size, Complex(0.0, 0.0));
  const auto& c = series.coeffs();
  for (std::size_t k = 1; k <= c.size(); ++k) a[k] = c[k - 1];
  detail::cached_plan(g_size).forward(a);
  Periodogram pg{grid_size, std::vector<double>(g_size)};
  for (std::size_t g = 0; g < g_size; ++g) pg.values[g] = a[g].real();
  return pg;
}

/// Angle in [0, 2pi) maximizing |Re sum_k c_k e^{-i k phi}|: grid argmax (first
/// index on ties) refined by golden-section search within one grid cell.
inline double extract_peak(const TrigMomentSeries& series, int grid_size = kDefaultGridSize) {
  const Periodogram pg = evaluate_periodogram(series, grid_size);
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t g = 0; g < pg.values.size(); ++g) {
    const double a = std::abs(pg.values[g]);
    if (a > best_abs) {
      best_abs = a;
      best = g;
    }
  }
  const double cell = 2.0 * std::numbers::pi / grid_size;
  const double center = cell * static_cast<double>(best);
  auto objective = [&](double phi) { return std::abs(series.value_at(phi)); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = center - cell;
  double hi = center + cell;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  double result = objective(refined) > objective(center) ? refined : center;
  result = std::fmod(result, 2.0 * std::numbers::pi);
  if (result < 0.0) result += 2.0 * std::numbers::pi;
  if (result >= 2.0 * std::numbers::pi) result = 0.0;
  return result;
}

/// c_hat_k = (2pi / G) sum_g eta_tau(values[g]) e^{+i k phi_g}, k = 1..k_max.
///
/// The periodogram is sampled with e^{-i k phi}, so analysis uses the opposite
/// sign; with tau = 0 a series c_k comes back as pi * c_k. This is the
/// synthesis/analysis pair of the multi-frequency power method under the
/// substitution theta = -phi.
inline TrigMomentSeries thresholded_fourier_coeffs(const Periodogram& pg, double tau, int k_max) {
  detail::check_grid(pg.grid_size, k_max);
  require(tau >= 0.0, ErrorKind::PreconditionViolation, "threshold must be nonnegative");
  const auto g_size = static_cast<std::size_t>(pg.grid_size);
  const double weight = 2.0 * std::numbers::pi / static_cast<double>(pg.grid_size);
  std::vector<Complex> out(static_cast<std::size_t>(k_max));
  if (detail::prefer_fft(g_size, k_max)) {
    std::vector<Complex> a(g_size);
    for (std::size_t g = 0; g < g_size; ++g) a[g] = Complex(soft_threshold(pg.values[g], tau), 0.0);
    detail::cached_plan(g_size).forward(a);
    for (int k = 1; k <= k_max; ++k) out[static_cast<std::size_t>(k - 1)] = weight * std::conj(a[static_cast<std::size_t>(k)]);
  } else {
    const auto& roots = detail::cached_roots(g_size);
    std::vector<double> shrunk(g_size);
    for (std::size_t g = 0; g < g_size; ++g) shrunk[g] = soft_threshold(pg.values[g], tau);
    for (int k = 1; k <= k_max; ++k) {
      Complex acc(0.0, 0.0);
      for (std::size_t g = 0; g < g_size; ++g) {
        if (shrunk[g] != 0.0) acc += shrunk[g] * std::conj(roots[(static_cast<std::size_t>(k) * g) % g_size]);
      }
      out[static_cast<std::size_t>(k - 1)] = weight * acc;
    }
  }
  return TrigMomentSeries(std::move(out));
}

}  // namespace mfsync
