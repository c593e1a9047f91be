#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mfsync/core/error.hpp"
#include "mfsync/core/parallel.hpp"
#include "mfsync/core/rng.hpp"
#include "mfsync/harmonic.hpp"
#include "mfsync/linalg.hpp"
#include "mfsync/models.hpp"
#include "mfsync/so3/rotation.hpp"
#include "mfsync/so3/wigner.hpp"
#include "mfsync/sync.hpp"

namespace mfsync {

using so3::Rotation;

/// Per-degree block Hermitian measurement matrices on the complete graph.
/// Channel k (1-based) has n x n blocks of size d_k = 2k+1; block (i, j)
/// estimates rho_k(g_i g_j^{-1}).
struct RotationStack {
  int n = 0;
  std::vector<HermitianMatrix> channels;
  NoiseKind kind = NoiseKind::Derived;
  /// r for corruption, lambda_k per channel for the Gaussian model.
  std::vector<double> levels;
  std::uint64_t seed = 0;

  int k_max() const noexcept { return static_cast<int>(channels.size()); }
  const HermitianMatrix& channel(int k) const { return channels.at(static_cast<std::size_t>(k - 1)); }

  /// Block (i, j) of channel k.
  ComplexMatrix block(int k, int i, int j) const {
    const int d = so3::rep_dimension(k);
    return channel(k).dense().block(i * d, j * d, d, d);
  }

  /// The same data restricted to channels 1..k.
  RotationStack prefix(int k) const {
    require(k >= 1 && k <= k_max(), ErrorKind::PreconditionViolation, "prefix degree out of range");
    RotationStack out = *this;
    out.channels.resize(static_cast<std::size_t>(k));
    if (kind == NoiseKind::Gaussian) out.levels.resize(static_cast<std::size_t>(k));
    return out;
  }
};

/// X^(k): the n blocks rho_k(g_i) stacked vertically.
inline ComplexMatrix stacked_reps(const std::vector<Rotation>& g, int k) {
  const int d = so3::rep_dimension(k);
  const int n = static_cast<int>(g.size());
  ComplexMatrix x(n * d, d);
  for (int i = 0; i < n; ++i) x.block(i * d, 0, d, d) = so3::wigner_rep(k, g[static_cast<std::size_t>(i)]);
  return x;
}

namespace detail {

inline void check_degree(int k_max) {
  require(k_max >= 1, ErrorKind::PreconditionViolation, "k_max must be >= 1");
  require(k_max <= so3::kMaxWignerDegree, ErrorKind::UnsupportedDegree,
          "k_max " + std::to_string(k_max) + " exceeds " + std::to_string(so3::kMaxWignerDegree));
}

/// Length of the real feature vector [Re rho_k, Im rho_k]_{k=1..k_max}.
inline int feature_length(int k_max) {
  int total = 0;
  for (int k = 1; k <= k_max; ++k) total += 2 * so3::rep_dimension(k) * so3::rep_dimension(k);
  return total;
}

/// Writes [Re M_k, Im M_k] (column-major) for k = 1..k_max into `out`,
/// each degree scaled by weight(k).
template <typename BlockFn, typename WeightFn>
void write_features(int k_max, BlockFn&& block, WeightFn&& weight, Eigen::Ref<Eigen::VectorXd> out) {
  Eigen::Index pos = 0;
  for (int k = 1; k <= k_max; ++k) {
    const ComplexMatrix m = block(k);
    const double w = weight(k);
    const Eigen::Index size = m.size();
    for (Eigen::Index e = 0; e < size; ++e) {
      out(pos + e) = w * m.data()[e].real();
      out(pos + size + e) = w * m.data()[e].imag();
    }
    pos += 2 * size;
  }
}

inline Eigen::VectorXd rep_features(int k_max, const Rotation& g) {
  Eigen::VectorXd f(feature_length(k_max));
  write_features(k_max, [&](int k) { return so3::wigner_rep(k, g); }, [](int) { return 1.0; }, f);
  return f;
}

/// Columns are rep_features of fresh Haar samples.
inline Eigen::MatrixXd sample_feature_matrix(int k_max, const std::vector<Rotation>& samples) {
  Eigen::MatrixXd p(feature_length(k_max), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s) p.col(static_cast<Eigen::Index>(s)) = rep_features(k_max, samples[s]);
  return p;
}

inline Eigen::Matrix3d real_rotation_block(const Eigen::Matrix3cd& rho1) {
  const Eigen::Matrix3cd& c = so3::real_basis_change();
  return (c * rho1 * c.adjoint()).real();
}

}  // namespace detail

/// Corruption model: per edge, g_ij = g_i g_j^{-1} with probability r and a
/// Haar sample otherwise; block (i, j) of channel k is rho_k(g_ij) for every
/// k from one draw. Diagonal blocks are zero.
inline RotationStack group_stack_corruption(const std::vector<Rotation>& truth, double r, int k_max, Rng& rng) {
  require(r >= 0.0 && r <= 1.0, ErrorKind::PreconditionViolation, "r must be in [0, 1]");
  detail::check_degree(k_max);
  const int n = static_cast<int>(truth.size());
  require(n >= 2, ErrorKind::PreconditionViolation, "need at least two rotations");
  const Rng base(rng());
  std::vector<ComplexMatrix> dense;
  for (int k = 1; k <= k_max; ++k) {
    const int d = so3::rep_dimension(k);
    dense.push_back(ComplexMatrix::Zero(n * d, n * d));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Rng edge = base.stream(detail::edge_stream_id(n, i, j));
      const Rotation g = edge.bernoulli(r) ? truth[static_cast<std::size_t>(i)] * truth[static_cast<std::size_t>(j)].inverse()
                                           : so3::sample_rotation(edge);
      for (int k = 1; k <= k_max; ++k) {
        const int d = so3::rep_dimension(k);
        dense[static_cast<std::size_t>(k - 1)].block(i * d, j * d, d, d) = so3::wigner_rep(k, g);
      }
    }
  }
  RotationStack out;
  out.n = n;
  out.kind = NoiseKind::Corruption;
  out.levels = {r};
  out.seed = base.key();
  for (auto& m : dense) out.channels.push_back(HermitianMatrix::from_upper(std::move(m)));
  return out;
}

/// Spiked Wigner model: H^(k) = (lambda_k / n) X^(k) X^(k)* + Delta^(k) / sqrt(n d_k),
/// Delta^(k) Hermitian with unit-variance complex Gaussian entries above the
/// diagonal and standard normal real diagonal, independent across k.
/// An infinite lambda_k means the noise-free matrix X^(k) X^(k)* / n.
inline RotationStack group_stack_gaussian(const std::vector<Rotation>& truth, const std::vector<double>& lambda,
                                          Rng& rng) {
  const int k_max = static_cast<int>(lambda.size());
  detail::check_degree(k_max);
  const int n = static_cast<int>(truth.size());
  require(n >= 2, ErrorKind::PreconditionViolation, "need at least two rotations");
  for (double l : lambda) require(l > 0.0, ErrorKind::PreconditionViolation, "lambda must be positive");
  const Rng base(rng());
  RotationStack out;
  out.n = n;
  out.kind = NoiseKind::Gaussian;
  out.levels = lambda;
  out.seed = base.key();
  const double half = std::sqrt(0.5);
  for (int k = 1; k <= k_max; ++k) {
    const int d = so3::rep_dimension(k);
    const double l = lambda[static_cast<std::size_t>(k - 1)];
    const ComplexMatrix x = stacked_reps(truth, k);
    ComplexMatrix h;
    if (std::isinf(l)) {
      h = (x * x.adjoint()) / static_cast<double>(n);
    } else {
      h = (l / n) * (x * x.adjoint());
      Rng channel = base.stream(static_cast<std::uint64_t>(k));
      const double scale = 1.0 / std::sqrt(static_cast<double>(n) * d);
      const Eigen::Index dim = h.rows();
      for (Eigen::Index c = 0; c < dim; ++c) h(c, c) += scale * channel.normal();
      // Upper triangle in row-major order so the draw order is fixed.
      for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = r + 1; c < dim; ++c) {
          const double re = channel.normal() * half;
          const double im = channel.normal() * half;
          h(r, c) += scale * Complex(re, im);
        }
      }
    }
    out.channels.push_back(HermitianMatrix::from_upper(std::move(h)));
  }
  return out;
}

/// ||X^(1)* X_hat^(1)||_F / (sqrt(3) n), computed with real rotation matrices
/// (unitarily equivalent to rho_1). Equals 1 iff est_i = truth_i g for one g.
inline double group_correlation(const std::vector<Rotation>& est, const std::vector<Rotation>& truth) {
  require(est.size() == truth.size(), ErrorKind::LengthMismatch, "rotation lists differ in length");
  require(!est.empty(), ErrorKind::PreconditionViolation, "empty rotation list");
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) acc += truth[i].matrix().transpose() * est[i].matrix();
  return std::min(1.0, acc.norm() / (std::sqrt(3.0) * static_cast<double>(est.size())));
}

struct GroupPpeOptions {
  int m_samples = 1000;
  /// Local pattern-search steps after the sample argmax.
  int refine_steps = 10;
  /// Initial perturbation angle of the local search, radians.
  double initial_step = 0.3;
  double step_shrink = 0.5;
  unsigned threads = 1;
};

struct GroupPpeResult {
  std::vector<Rotation> rotations;
  /// Retrieved g_ij for i < j, in ObservationGraph::edges() order.
  std::vector<Rotation> edge_estimates;
  Diagnostics diagnostics;
};

namespace detail {

/// Rounds the 3x3 blocks of a 3n x 3 real frame to rotations: unitary
/// projection, a global reflection fix by majority determinant, then the
/// nearest rotation per block.
inline std::vector<Rotation> round_frame(const Eigen::MatrixXd& frame, int n) {
  std::vector<Eigen::Matrix3d> blocks(static_cast<std::size_t>(n));
  int negative = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Matrix3d raw = frame.block(3 * i, 0, 3, 3);
    Eigen::Matrix3d ortho;
    try {
      ortho = unitary_projection(raw.cast<Complex>()).real();
    } catch (const Error& e) {
      throw Error(e.kind(), "vertex block " + std::to_string(i) + ": smallest singular value too small");
    }
    if (ortho.determinant() < 0.0) ++negative;
    blocks[static_cast<std::size_t>(i)] = ortho;
  }
  const bool flip = 2 * negative > n;
  std::vector<Rotation> out;
  out.reserve(static_cast<std::size_t>(n));
  for (auto& b : blocks) out.push_back(Rotation::from_matrix(so3::nearest_rotation(flip ? Eigen::Matrix3d(-b) : b)));
  return out;
}

}  // namespace detail

/// Spectral pipeline for SO(3).
///
/// A. Per degree k, U^(k) = top d_k eigenvectors of H^(k), W^(k) = n U^(k) U^(k)*.
/// B. Per edge, g_ij maximizes sum_k d_k Re tr[W^(k)_ij rho_k(g)^*] over
///    m Haar samples, then a shrinking local pattern search.
/// C. The 3n x 3n real matrix with blocks R(g_ij) gives a top-3 frame whose
///    blocks are rounded to rotations.
inline GroupPpeResult group_ppe(const RotationStack& stack, Rng& rng, const GroupPpeOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  require(options.m_samples >= 100, ErrorKind::PreconditionViolation,
          "m_samples must be >= 100, got " + std::to_string(options.m_samples));
  require(options.refine_steps >= 0, ErrorKind::PreconditionViolation, "refine_steps must be >= 0");
  const int k_max = stack.k_max();
  detail::check_degree(k_max);
  const int n = stack.n;

  // Step A.
  std::vector<ComplexMatrix> frames(static_cast<std::size_t>(k_max));
  parallel_for(static_cast<std::size_t>(k_max), options.threads, [&](std::size_t kk) {
    const int k = static_cast<int>(kk) + 1;
    try {
      frames[kk] = top_d_eigenvectors(stack.channel(k), so3::rep_dimension(k)) * std::sqrt(static_cast<double>(n));
    } catch (const Error& e) {
      throw Error(e.kind(), "degree " + std::to_string(k) + " channel: " + e.message());
    }
  });

  // Step B.
  std::vector<Rotation> samples;
  samples.reserve(static_cast<std::size_t>(options.m_samples));
  for (int s = 0; s < options.m_samples; ++s) samples.push_back(so3::sample_rotation(rng));
  const Eigen::MatrixXd sample_features = detail::sample_feature_matrix(k_max, samples);
  const Rng search_base(rng());

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  const auto edge_count = static_cast<Eigen::Index>(edges.size());
  const int features = detail::feature_length(k_max);
  Eigen::MatrixXd edge_features(edge_count, features);
  auto edge_block = [&](std::size_t e, int k) {
    const int d = so3::rep_dimension(k);
    const auto& f = frames[static_cast<std::size_t>(k - 1)];
    return ComplexMatrix(f.block(edges[e].first * d, 0, d, d) * f.block(edges[e].second * d, 0, d, d).adjoint());
  };
  parallel_for(edges.size(), options.threads, [&](std::size_t e) {
    Eigen::VectorXd row(features);
    detail::write_features(
        k_max, [&](int k) { return edge_block(e, k); }, [](int k) { return static_cast<double>(so3::rep_dimension(k)); },
        row);
    edge_features.row(static_cast<Eigen::Index>(e)) = row.transpose();
  });
  const Eigen::MatrixXd scores = edge_features * sample_features;

  std::vector<Rotation> estimates(edges.size());
  parallel_for(edges.size(), options.threads, [&](std::size_t e) {
    const auto row = static_cast<Eigen::Index>(e);
    Eigen::Index best_col = 0;
    double best = scores.row(row).maxCoeff(&best_col);
    Rotation g = samples[static_cast<std::size_t>(best_col)];
    const Eigen::VectorXd weights = edge_features.row(row).transpose();
    Rng local = search_base.stream(static_cast<std::uint64_t>(e));
    double step = options.initial_step;
    for (int s = 0; s < options.refine_steps; ++s, step *= options.step_shrink) {
      // Three orthogonal axes in a random orientation; along each, a
      // parabola through the +-step samples proposes an interior move.
      const Eigen::Matrix3d axes = so3::sample_rotation(local).matrix();
      for (int a = 0; a < 3; ++a) {
        auto value_at = [&](double angle) {
          const Rotation candidate = Rotation::axis_angle(axes.col(a), angle) * g;
          return std::pair{weights.dot(detail::rep_features(k_max, candidate)), candidate};
        };
        const auto plus = value_at(step);
        const auto minus = value_at(-step);
        const double curvature = plus.first - 2.0 * best + minus.first;
        std::optional<std::pair<double, Rotation>> vertex;
        if (curvature < 0.0) {
          const double shift = std::clamp(step * (minus.first - plus.first) / (2.0 * curvature), -step, step);
          vertex = value_at(shift);
        }
        for (const auto* c : {&plus, &minus}) {
          if (c->first > best) {
            best = c->first;
            g = c->second;
          }
        }
        if (vertex && vertex->first > best) {
          best = vertex->first;
          g = vertex->second;
        }
      }
    }
    estimates[e] = g;
  });

  // Step C.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    const Eigen::Matrix3d r = estimates[e].matrix();
    h.block(3 * i, 3 * j, 3, 3) = r;
    h.block(3 * j, 3 * i, 3, 3) = r.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  require(solver.info() == Eigen::Success, ErrorKind::NoConvergence, "eigensolver failed on the retrieved matrix");
  const Eigen::MatrixXd frame = solver.eigenvectors().rightCols(3).rowwise().reverse() * std::sqrt(static_cast<double>(n));

  GroupPpeResult result;
  result.rotations = detail::round_frame(frame, n);
  result.edge_estimates = std::move(estimates);
  result.diagnostics.iterations = 1;
  result.diagnostics.wall_ms = detail::elapsed_ms(start);
  return result;
}

struct GroupRefineOptions {
  /// Relative soft-threshold per iteration (fraction of each vertex's
  /// maximum |h_i| over the samples). Levels >= 1 zero everything.
  ThresholdSchedule schedule{0.5, 0.5, 0.5, 1.0};
  int iterations = 10;
  int m_samples = 1000;
  unsigned threads = 1;
};

/// Iterative refinement: per iteration, Y^(k) = H^(k) X^(k), vertex
/// objectives h_i(g) = sum_k d_k Re tr[Y_i^(k) rho_k(g)^*] on fresh Haar
/// samples, relative soft-thresholding, U_i^(k) = (1/m) sum_g eta(h_i(g)) rho_k(g),
/// unitary projection per block. Vertices whose degree-k block is rank
/// deficient keep their previous blocks (counted in diagnostics).
inline std::vector<Rotation> group_refine(const RotationStack& stack, const std::vector<Rotation>& init, Rng& rng,
                                          const GroupRefineOptions& options = {},
                                          Diagnostics* diagnostics = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  require(options.m_samples >= 100, ErrorKind::PreconditionViolation, "m_samples must be >= 100");
  require(options.iterations >= 1, ErrorKind::PreconditionViolation, "need at least one iteration");
  const auto& sch = options.schedule;
  require(sch.initial >= 0.0 && sch.initial <= sch.target && sch.target <= sch.cap, ErrorKind::PreconditionViolation,
          "schedule needs 0 <= initial <= target <= cap");
  const int k_max = stack.k_max();
  detail::check_degree(k_max);
  const int n = stack.n;
  require(static_cast<int>(init.size()) == n, ErrorKind::LengthMismatch, "initialization length differs from stack");

  std::vector<ComplexMatrix> x(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) x[static_cast<std::size_t>(k - 1)] = stacked_reps(init, k);
  std::vector<Rotation> current = init;
  const int features = detail::feature_length(k_max);
  int kept = 0;

  for (int t = 1; t <= options.iterations; ++t) {
    const double tau = sch.at(t, options.iterations);
    std::vector<Rotation> samples;
    samples.reserve(static_cast<std::size_t>(options.m_samples));
    for (int s = 0; s < options.m_samples; ++s) samples.push_back(so3::sample_rotation(rng));
    const Eigen::MatrixXd p = detail::sample_feature_matrix(k_max, samples);

    std::vector<ComplexMatrix> y(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) y[static_cast<std::size_t>(k - 1)] = stack.channel(k).dense() * x[static_cast<std::size_t>(k - 1)];
    Eigen::MatrixXd vertex_features(n, features);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd row(features);
      detail::write_features(
          k_max,
          [&](int k) {
            const int d = so3::rep_dimension(k);
            return ComplexMatrix(y[static_cast<std::size_t>(k - 1)].block(i * d, 0, d, d));
          },
          [](int k) { return static_cast<double>(so3::rep_dimension(k)); }, row);
      vertex_features.row(i) = row.transpose();
    }
    Eigen::MatrixXd h = vertex_features * p;
    for (int i = 0; i < n; ++i) {
      const double level = tau * h.row(i).cwiseAbs().maxCoeff();
      for (Eigen::Index s = 0; s < h.cols(); ++s) h(i, s) = soft_threshold(h(i, s), level);
    }
    // Row i of `quad` holds [Re U_i^(k), Im U_i^(k)] for all k.
    const Eigen::MatrixXd quad = (h * p.transpose()) / static_cast<double>(options.m_samples);

    for (int i = 0; i < n; ++i) {
      std::vector<ComplexMatrix> blocks;
      bool ok = true;
      Eigen::Index pos = 0;
      for (int k = 1; k <= k_max && ok; ++k) {
        const int d = so3::rep_dimension(k);
        ComplexMatrix u(d, d);
        for (Eigen::Index e = 0; e < u.size(); ++e)
          u.data()[e] = Complex(quad(i, pos + e), quad(i, pos + u.size() + e));
        pos += 2 * u.size();
        try {
          blocks.push_back(unitary_projection(u));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::RankDeficient) throw;
          ok = false;
        }
      }
      if (!ok) {
        ++kept;
        continue;
      }
      for (int k = 1; k <= k_max; ++k) {
        const int d = so3::rep_dimension(k);
        x[static_cast<std::size_t>(k - 1)].block(i * d, 0, d, d) = blocks[static_cast<std::size_t>(k - 1)];
      }
      current[static_cast<std::size_t>(i)] =
          Rotation::from_matrix(so3::nearest_rotation(detail::real_rotation_block(blocks[0])));
    }
  }
  if (diagnostics) {
    diagnostics->iterations = options.iterations;
    diagnostics->zero_entries += kept;
    diagnostics->wall_ms = detail::elapsed_ms(start);
  }
  return current;
}

}  // namespace mfsync
