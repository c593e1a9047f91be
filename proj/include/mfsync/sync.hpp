#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mfsync/core/error.hpp"
#include "mfsync/core/parallel.hpp"
#include "mfsync/harmonic.hpp"
#include "mfsync/linalg.hpp"
#include "mfsync/models.hpp"

namespace mfsync {

struct Diagnostics {
  int iterations = 0;
  /// Eigen-residuals per channel (PPE-SPC) or successive-iterate distances.
  std::vector<double> residuals;
  /// Entries whose phase was undefined and were replaced or kept.
  int zero_entries = 0;
  double wall_ms = 0.0;
};

/// Retrieved offset theta_ij for edge (i, j), i < j.
struct EdgeOffset {
  int i = 0;
  int j = 0;
  double theta = 0.0;
};

struct SyncResult {
  PhaseVector estimate;
  std::vector<double> per_channel_eigenvalues;
  std::optional<std::vector<EdgeOffset>> retrieved_offsets;
  /// H_hat built from the retrieved offsets.
  HermitianMatrix retrieved_matrix;
  Diagnostics diagnostics;
};

/// Relative soft-threshold levels tau_t (a fraction of each vertex's
/// periodogram maximum). Linear ramp from `initial` to `target` over the first
/// `ramp_fraction` of the iterations, then linear from `target` to `cap`.
struct ThresholdSchedule {
  double initial = 0.0;
  double target = 0.99;
  double cap = 0.999;
  double ramp_fraction = 1.0;

  void validate() const {
    require(initial >= 0.0 && initial <= target && target <= cap && cap < 1.0, ErrorKind::PreconditionViolation,
            "schedule needs 0 <= initial <= target <= cap < 1");
    require(ramp_fraction > 0.0 && ramp_fraction <= 1.0, ErrorKind::PreconditionViolation,
            "ramp_fraction must be in (0, 1]");
  }

  /// Level at iteration t in [1, total].
  double at(int t, int total) const {
    const int ramp_end = std::max(1, static_cast<int>(std::lround(ramp_fraction * total)));
    if (t <= ramp_end) {
      if (ramp_end == 1) return target;
      return initial + (target - initial) * static_cast<double>(t - 1) / static_cast<double>(ramp_end - 1);
    }
    if (total == ramp_end) return target;
    const double frac = static_cast<double>(t - ramp_end) / static_cast<double>(total - ramp_end);
    return std::min(cap, target + (cap - target) * frac);
  }

  friend bool operator==(const ThresholdSchedule&, const ThresholdSchedule&) = default;
};

inline constexpr int kDefaultMfgpmIterations = 400;
inline constexpr int kDefaultGpmIterations = 200;
inline constexpr double kZeroEntryTolerance = 1e-12;

namespace detail {

/// v_i / |v_i|; entries below kZeroEntryTolerance * max|v| take the fallback
/// value (1 when none given) and are counted.
inline ComplexVector round_entries(const ComplexVector& v, const ComplexVector* fallback, int& zero_entries) {
  ComplexVector out(v.size());
  const double scale = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a <= kZeroEntryTolerance * scale || a == 0.0) {
      out(i) = fallback ? (*fallback)(i) : Complex(1.0, 0.0);
      ++zero_entries;
    } else {
      out(i) = v(i) / a;
    }
  }
  return out;
}

/// Periodograms of rows i and j of `u` (j < 0 means none) from one FFT.
/// Re sum_k c_k e^{-i k phi} is the transform of the Hermitian-symmetric
/// sequence s[m] = (c[m] + conj(c[-m])) / 2, whose transform is real.
inline void paired_periodograms(const ComplexMatrix& u, int i, int j, std::vector<Complex>& buffer,
                                std::vector<double>& values_a, std::vector<double>& values_b) {
  const std::size_t g_size = buffer.size();
  const auto k_max = static_cast<std::size_t>(u.cols());
  std::fill(buffer.begin(), buffer.end(), Complex(0.0, 0.0));
  const Complex imag(0.0, 1.0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    const Complex a = u(i, static_cast<Eigen::Index>(k - 1));
    const Complex b = j >= 0 ? u(j, static_cast<Eigen::Index>(k - 1)) : Complex(0.0, 0.0);
    buffer[k] += 0.5 * (a + imag * b);
    buffer[g_size - k] += 0.5 * (std::conj(a) + imag * std::conj(b));
  }
  cached_plan(g_size).forward(buffer);
  values_a.resize(g_size);
  values_b.resize(g_size);
  for (std::size_t g = 0; g < g_size; ++g) {
    values_a[g] = buffer[g].real();
    values_b[g] = buffer[g].imag();
  }
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Leading eigenvector of `h`, rounded entrywise to unit modulus.
inline PhaseVector spectral_sync(const HermitianMatrix& h, Diagnostics* diagnostics = nullptr) {
  const EigenPair pair = leading_eigenpair(h);
  int zeros = 0;
  PhaseVector out(detail::round_entries(pair.vector, nullptr, zeros));
  if (diagnostics) diagnostics->zero_entries += zeros;
  return out;
}

/// Generalized power method: x <- round(H x), at most `iterations` times,
/// stopping once ||x_{t+1} - x_t|| < 1e-9 sqrt(n).
inline PhaseVector gpm(const HermitianMatrix& h, const PhaseVector& init, int iterations = kDefaultGpmIterations,
                       Diagnostics* diagnostics = nullptr) {
  require(iterations >= 1, ErrorKind::PreconditionViolation, "GPM needs at least one iteration");
  require(init.size() == h.dim(), ErrorKind::LengthMismatch, "initialization length differs from matrix size");
  const double stop = 1e-9 * std::sqrt(static_cast<double>(h.dim()));
  ComplexVector x = init.values();
  int zeros = 0;
  int t = 0;
  double step = 0.0;
  for (t = 1; t <= iterations; ++t) {
    ComplexVector next = detail::round_entries(h.dense() * x, &x, zeros);
    step = (next - x).norm();
    x = std::move(next);
    if (step < stop) break;
  }
  if (diagnostics) {
    diagnostics->iterations = std::min(t, iterations);
    diagnostics->residuals.push_back(step);
    diagnostics->zero_entries += zeros;
  }
  return PhaseVector(std::move(x));
}

struct PpeOptions {
  int grid_size = kDefaultGridSize;
  /// Edge probability used to rescale incomplete graphs; estimated from the
  /// edge count when absent.
  std::optional<double> edge_probability;
  unsigned threads = 1;
  bool keep_offsets = true;
};

/// Periodogram peak extraction with spectral methods.
///
/// 1. Per channel, the leading eigenvector u^(k) (norm sqrt(n)) gives
///    W^(k) = u^(k) u^(k)^*.
/// 2. Per edge, theta_ij is the peak of |Re sum_k W^(k)_ij e^{-i k phi}|.
/// 3. H_hat_ij = e^{i theta_ij} on edges; the estimate is spectral_sync(H_hat).
///
/// Incomplete graphs are first rescaled by rescale_incomplete.
inline SyncResult ppe_spc(const FrequencyStack& input, const PpeOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  require(input.k_max() >= 1, ErrorKind::PreconditionViolation, "empty frequency stack");
  require(input.graph.is_connected(), ErrorKind::PreconditionViolation, "observation graph is not connected");
  const int n = input.size();
  const int k_max = input.k_max();
  detail::check_grid(options.grid_size, k_max);

  std::optional<FrequencyStack> rescaled;
  if (!input.graph.is_complete() && !input.metadata.rescaled_p) {
    rescaled = rescale_incomplete(input, options.edge_probability.value_or(estimate_edge_probability(input.graph)));
  }
  const FrequencyStack& stack = rescaled ? *rescaled : input;

  SyncResult result;
  result.per_channel_eigenvalues.assign(static_cast<std::size_t>(k_max), 0.0);
  result.diagnostics.residuals.assign(static_cast<std::size_t>(k_max), 0.0);
  ComplexMatrix u(n, k_max);
  parallel_for(static_cast<std::size_t>(k_max), options.threads, [&](std::size_t k) {
    const HermitianMatrix& h = stack.channels[k];
    EigenPair pair;
    try {
      pair = leading_eigenpair(h);
    } catch (const Error& e) {
      throw Error(e.kind(), "channel " + std::to_string(k + 1) + ": " + e.message());
    }
    result.per_channel_eigenvalues[k] = pair.value;
    result.diagnostics.residuals[k] =
        (h.dense() * pair.vector - pair.value * pair.vector).norm() / std::max(h.frobenius_norm(), 1e-300);
    u.col(static_cast<Eigen::Index>(k)) = pair.vector;
  });

  const auto& edges = stack.graph.edges();
  std::vector<double> offsets(edges.size());
  parallel_for(edges.size(), options.threads, [&](std::size_t e) {
    const auto [i, j] = edges[e];
    std::vector<Complex> c(static_cast<std::size_t>(k_max));
    for (int k = 0; k < k_max; ++k) c[static_cast<std::size_t>(k)] = u(i, k) * std::conj(u(j, k));
    offsets[e] = extract_peak(TrigMomentSeries(std::move(c)), options.grid_size);
  });

  ComplexMatrix h_hat = ComplexMatrix::Zero(n, n);
  for (std::size_t e = 0; e < edges.size(); ++e) h_hat(edges[e].first, edges[e].second) = std::polar(1.0, offsets[e]);
  result.retrieved_matrix = HermitianMatrix::from_upper(std::move(h_hat));
  if (options.keep_offsets) {
    std::vector<EdgeOffset> list(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) list[e] = {edges[e].first, edges[e].second, offsets[e]};
    result.retrieved_offsets = std::move(list);
  }
  result.estimate = spectral_sync(result.retrieved_matrix, &result.diagnostics);
  result.diagnostics.iterations = 1;
  result.diagnostics.wall_ms = detail::elapsed_ms(start);
  return result;
}

/// Stack whose channel k is the entrywise k-th power of `h` on the graph's edges.
inline FrequencyStack entrywise_power_stack(const HermitianMatrix& h, const ObservationGraph& graph, int k_max) {
  require(k_max >= 1, ErrorKind::PreconditionViolation, "k_max must be >= 1");
  const int n = graph.size();
  std::vector<ComplexMatrix> dense(static_cast<std::size_t>(k_max), ComplexMatrix::Zero(n, n));
  for (auto [i, j] : graph.edges()) {
    const Complex base = h(i, j);
    Complex p = base;
    for (int k = 0; k < k_max; ++k) {
      dense[static_cast<std::size_t>(k)](i, j) = p;
      p *= base;
    }
  }
  FrequencyStack out;
  out.graph = graph;
  out.metadata.kind = NoiseKind::Derived;
  for (auto& m : dense) out.channels.push_back(HermitianMatrix::from_upper(std::move(m)));
  return out;
}

/// PPE-SPC followed by reps - 1 fresh runs on the entrywise powers 1..k_max of
/// the previous H_hat.
inline SyncResult ppe_spc_repeated(const FrequencyStack& stack, int k_max, int reps, const PpeOptions& options = {}) {
  require(reps >= 1, ErrorKind::PreconditionViolation, "reps must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  SyncResult result = ppe_spc(stack, options);
  for (int rep = 1; rep < reps; ++rep) {
    const FrequencyStack next = entrywise_power_stack(result.retrieved_matrix, stack.graph, k_max);
    result = ppe_spc(next, options);
  }
  result.diagnostics.iterations = reps;
  result.diagnostics.wall_ms = detail::elapsed_ms(start);
  return result;
}

struct MfgpmOptions {
  ThresholdSchedule schedule{};
  int iterations = kDefaultMfgpmIterations;
  int grid_size = kDefaultGridSize;
};

/// Multi-frequency generalized power method.
///
/// Keeps one iterate per channel, z^(k,0) = init^k. Each iteration multiplies
/// every channel by its H^(k), forms per vertex the periodogram of
/// (u^(k)_i)_k, soft-thresholds it at tau_t times its maximum magnitude,
/// transforms back to k_max coefficients and rounds them to unit modulus.
/// Returns the channel-1 iterate.
inline PhaseVector mfgpm(const FrequencyStack& stack, const PhaseVector& init, const MfgpmOptions& options = {},
                         Diagnostics* diagnostics = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  require(options.iterations >= 1, ErrorKind::PreconditionViolation, "MFGPM needs at least one iteration");
  require(stack.k_max() >= 1, ErrorKind::PreconditionViolation, "empty frequency stack");
  require(init.size() == stack.size(), ErrorKind::LengthMismatch, "initialization length differs from stack size");
  options.schedule.validate();
  const int n = stack.size();
  const int k_max = stack.k_max();
  detail::check_grid(options.grid_size, k_max);

  ComplexMatrix z(n, k_max);
  for (int k = 1; k <= k_max; ++k) z.col(k - 1) = init.power(k).values();

  int zeros = 0;
  ComplexMatrix u(n, k_max);
  const double expected_norm = std::sqrt(static_cast<double>(n));
  const auto g_size = static_cast<std::size_t>(options.grid_size);
  const bool use_fft = FftPlan::is_power_of_two(g_size);
  std::vector<Complex> buffer(use_fft ? g_size : 0);
  std::vector<double> values_a, values_b;

  // Rounds vertex i's denoised coefficients into z.
  auto round_vertex = [&](int i, const TrigMomentSeries& denoised, double peak) {
    const double floor = kZeroEntryTolerance * 2.0 * std::numbers::pi * peak;
    for (int k = 1; k <= k_max; ++k) {
      const Complex ck = denoised[k];
      const double a = std::abs(ck);
      if (a <= floor) {
        ++zeros;
      } else {
        z(i, k - 1) = ck / a;
      }
    }
  };
  auto peak_of = [](const std::vector<double>& v) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    return peak;
  };

  for (int t = 1; t <= options.iterations; ++t) {
    const double tau = options.schedule.at(t, options.iterations);
    for (int k = 0; k < k_max; ++k) u.col(k).noalias() = stack.channels[static_cast<std::size_t>(k)].dense() * z.col(k);
    if (!use_fft) {
      for (int i = 0; i < n; ++i) {
        std::vector<Complex> c(static_cast<std::size_t>(k_max));
        for (int k = 0; k < k_max; ++k) c[static_cast<std::size_t>(k)] = u(i, k);
        const Periodogram pg = evaluate_periodogram_direct(TrigMomentSeries(std::move(c)), options.grid_size);
        const double peak = peak_of(pg.values);
        if (peak == 0.0) {
          zeros += k_max;
          continue;
        }
        round_vertex(i, thresholded_fourier_coeffs(pg, tau * peak, k_max), peak);
      }
    } else {
      // Two vertices share each transform: both periodograms are real, so one
      // goes in the real part and one in the imaginary part.
      for (int i = 0; i < n; i += 2) {
        const int j = i + 1 < n ? i + 1 : -1;
        detail::paired_periodograms(u, i, j, buffer, values_a, values_b);
        const double peak_a = peak_of(values_a);
        const double peak_b = j >= 0 ? peak_of(values_b) : 0.0;
        for (std::size_t g = 0; g < g_size; ++g) {
          buffer[g] = Complex(soft_threshold(values_a[g], tau * peak_a),
                              j >= 0 ? soft_threshold(values_b[g], tau * peak_b) : 0.0);
        }
        detail::cached_plan(g_size).forward(buffer);
        const double weight = 2.0 * std::numbers::pi / static_cast<double>(g_size);
        std::vector<Complex> ca(static_cast<std::size_t>(k_max)), cb(static_cast<std::size_t>(k_max));
        for (int k = 1; k <= k_max; ++k) {
          const Complex x = buffer[static_cast<std::size_t>(k)];
          const Complex y = std::conj(buffer[g_size - static_cast<std::size_t>(k)]);
          // Transforms of the real and imaginary inputs, conjugated for analysis.
          ca[static_cast<std::size_t>(k - 1)] = weight * std::conj(0.5 * (x + y));
          cb[static_cast<std::size_t>(k - 1)] = weight * std::conj(Complex(0.0, -0.5) * (x - y));
        }
        if (peak_a == 0.0) {
          zeros += k_max;
        } else {
          round_vertex(i, TrigMomentSeries(std::move(ca)), peak_a);
        }
        if (j >= 0) {
          if (peak_b == 0.0) {
            zeros += k_max;
          } else {
            round_vertex(j, TrigMomentSeries(std::move(cb)), peak_b);
          }
        }
      }
    }
    require(std::abs(z.col(0).norm() - expected_norm) <= 1e-9 * expected_norm, ErrorKind::DivergenceDetected,
            "channel-1 iterate left the unit-modulus torus");
  }
  if (diagnostics) {
    diagnostics->iterations = options.iterations;
    diagnostics->zero_entries += zeros;
    diagnostics->wall_ms = detail::elapsed_ms(start);
  }
  return PhaseVector(z.col(0));
}

}  // namespace mfsync
