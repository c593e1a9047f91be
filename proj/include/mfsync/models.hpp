#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <complex>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "mfsync/core/error.hpp"
#include "mfsync/core/rng.hpp"
#include "mfsync/linalg.hpp"

namespace mfsync {

/// n unit-modulus complex numbers.
class PhaseVector {
 public:
  PhaseVector() = default;

  /// Normalizes every entry to unit modulus; zero entries are rejected.
  explicit PhaseVector(ComplexVector values) : v_(std::move(values)) {
    for (Eigen::Index i = 0; i < v_.size(); ++i) {
      const double a = std::abs(v_(i));
      require(a > 0.0 && std::isfinite(a), ErrorKind::PreconditionViolation,
              "phase entry " + std::to_string(i) + " has no defined phase");
      v_(i) /= a;
    }
  }

  static PhaseVector from_angles(const std::vector<double>& angles) {
    ComplexVector v(static_cast<Eigen::Index>(angles.size()));
    for (std::size_t i = 0; i < angles.size(); ++i) v(static_cast<Eigen::Index>(i)) = std::polar(1.0, angles[i]);
    return PhaseVector(std::move(v));
  }

  static PhaseVector ones(Eigen::Index n) { return PhaseVector(ComplexVector::Ones(n)); }

  Eigen::Index size() const noexcept { return v_.size(); }
  Complex operator[](Eigen::Index i) const { return v_(i); }
  const ComplexVector& values() const noexcept { return v_; }

  /// Angles in [0, 2pi).
  std::vector<double> angles() const {
    std::vector<double> out(static_cast<std::size_t>(v_.size()));
    for (Eigen::Index i = 0; i < v_.size(); ++i) {
      double a = std::arg(v_(i));
      if (a < 0.0) a += 2.0 * std::numbers::pi;
      out[static_cast<std::size_t>(i)] = a;
    }
    return out;
  }

  /// Entrywise k-th power (k >= 0).
  PhaseVector power(int k) const {
    PhaseVector out;
    out.v_ = v_.unaryExpr([k](Complex c) { return unit_power(c, k); });
    return out;
  }

  /// c^k by binary exponentiation, renormalized to unit modulus.
  static Complex unit_power(Complex c, int k) {
    Complex result(1.0, 0.0);
    Complex base = c;
    for (unsigned e = static_cast<unsigned>(k); e != 0; e >>= 1) {
      if (e & 1u) result *= base;
      base *= base;
    }
    return result / std::abs(result);
  }

 private:
  ComplexVector v_;
};

/// Undirected simple graph; adjacency is symmetric with an empty diagonal.
class ObservationGraph {
 public:
  ObservationGraph() = default;

  static ObservationGraph complete(int n) {
    ObservationGraph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
    return g;
  }

  /// Builds a graph from an explicit edge list. Self-loops and duplicates are
  /// rejected; connectivity is not required here (see is_connected()).
  static ObservationGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    ObservationGraph g(n);
    for (auto [i, j] : edges) {
      require(i != j && i >= 0 && j >= 0 && i < n && j < n, ErrorKind::PreconditionViolation,
              "invalid edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
      require(!g.has_edge(i, j), ErrorKind::PreconditionViolation, "duplicate edge");
      g.add_edge(std::min(i, j), std::max(i, j));
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    return g;
  }

  int size() const noexcept { return n_; }
  bool has_edge(int i, int j) const { return adj_[index(i, j)] != 0; }
  /// Edges (i, j) with i < j in row-major order.
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  double density() const {
    if (n_ < 2) return 1.0;
    return 2.0 * static_cast<double>(edges_.size()) / (static_cast<double>(n_) * (n_ - 1));
  }
  bool is_complete() const { return n_ < 2 || edges_.size() == static_cast<std::size_t>(n_) * (n_ - 1) / 2; }

  std::vector<int> degrees() const {
    std::vector<int> d(static_cast<std::size_t>(n_), 0);
    for (auto [i, j] : edges_) {
      ++d[static_cast<std::size_t>(i)];
      ++d[static_cast<std::size_t>(j)];
    }
    return d;
  }

  bool is_connected() const {
    if (n_ <= 1) return true;
    std::vector<std::vector<int>> nbr(static_cast<std::size_t>(n_));
    for (auto [i, j] : edges_) {
      nbr[static_cast<std::size_t>(i)].push_back(j);
      nbr[static_cast<std::size_t>(j)].push_back(i);
    }
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w : nbr[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          ++reached;
          frontier.push(w);
        }
      }
    }
    return reached == n_;
  }

  friend bool operator==(const ObservationGraph& a, const ObservationGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  explicit ObservationGraph(int n) : n_(n), adj_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {
    require(n >= 1, ErrorKind::PreconditionViolation, "graph needs at least one vertex");
  }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
  }

  void add_edge(int i, int j) {
    adj_[index(i, j)] = 1;
    adj_[index(j, i)] = 1;
    edges_.emplace_back(i, j);
  }

  int n_ = 0;
  std::vector<char> adj_;
  std::vector<std::pair<int, int>> edges_;
};

enum class NoiseKind { Gaussian, Corruption, Derived };

inline const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Corruption: return "corruption";
    case NoiseKind::Derived: return "derived";
  }
  return "unknown";
}

struct StackMetadata {
  NoiseKind kind = NoiseKind::Derived;
  /// sigma for the Gaussian model, r for random corruption.
  double level = 0.0;
  std::uint64_t seed = 0;
  /// Set once rescale_incomplete has been applied.
  std::optional<double> rescaled_p;
};

/// Channels H^(1..k_max) over one observation graph.
struct FrequencyStack {
  std::vector<HermitianMatrix> channels;
  ObservationGraph graph;
  StackMetadata metadata;

  int k_max() const noexcept { return static_cast<int>(channels.size()); }
  int size() const noexcept { return graph.size(); }
  /// Channel k, 1-based.
  const HermitianMatrix& channel(int k) const { return channels.at(static_cast<std::size_t>(k - 1)); }
};

/// n i.i.d. uniform phases.
inline PhaseVector sample_ground_truth(int n, Rng& rng) {
  require(n >= 2, ErrorKind::PreconditionViolation, "need n >= 2");
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, rng.angle());
  return PhaseVector(std::move(v));
}

inline constexpr int kMaxGraphAttempts = 100;

/// G(n, p), resampled until connected (at most kMaxGraphAttempts draws).
inline ObservationGraph erdos_renyi(int n, double p, Rng& rng) {
  require(p > 0.0 && p <= 1.0, ErrorKind::PreconditionViolation, "edge probability must be in (0, 1]");
  require(n >= 1, ErrorKind::PreconditionViolation, "need n >= 1");
  for (int attempt = 0; attempt < kMaxGraphAttempts; ++attempt) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(p)) edges.emplace_back(i, j);
    auto g = ObservationGraph::from_edges(n, edges);
    if (g.is_connected()) return g;
  }
  throw Error(ErrorKind::DisconnectedAfterRetries,
              "no connected G(" + std::to_string(n) + ", " + std::to_string(p) + ") in " +
                  std::to_string(kMaxGraphAttempts) + " attempts");
}

namespace detail {

inline std::uint64_t edge_stream_id(int n, int i, int j) {
  return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(j);
}

}  // namespace detail

/// Random corruption model: each edge carries z_i conj(z_j) with probability r
/// and a uniform phase otherwise; channel k is the entrywise k-th power of
/// channel 1. Noise for edge (i, j) comes from its own stream, so the result
/// does not depend on edge visiting order.
inline FrequencyStack random_corruption_stack(const PhaseVector& z, const ObservationGraph& g, double r,
                                              int k_max, Rng& rng) {
  require(r >= 0.0 && r <= 1.0, ErrorKind::PreconditionViolation, "r must be in [0, 1]");
  require(k_max >= 1, ErrorKind::PreconditionViolation, "k_max must be >= 1");
  const int n = g.size();
  require(z.size() == n, ErrorKind::LengthMismatch, "truth length differs from graph size");
  const std::uint64_t key = rng();

  std::vector<ComplexMatrix> dense(static_cast<std::size_t>(k_max), ComplexMatrix::Zero(n, n));
  for (auto [i, j] : g.edges()) {
    Rng edge_rng = Rng(key).stream(detail::edge_stream_id(n, i, j));
    Complex h1;
    if (edge_rng.bernoulli(r)) {
      h1 = z[i] * std::conj(z[j]);
    } else {
      h1 = std::polar(1.0, edge_rng.angle());
    }
    Complex hk = h1;
    for (int k = 0; k < k_max; ++k) {
      dense[static_cast<std::size_t>(k)](i, j) = hk;
      hk *= h1;
    }
  }
  FrequencyStack stack;
  stack.graph = g;
  stack.metadata = {NoiseKind::Corruption, r, key, std::nullopt};
  stack.channels.reserve(static_cast<std::size_t>(k_max));
  for (auto& m : dense) stack.channels.push_back(HermitianMatrix::from_upper(std::move(m)));
  return stack;
}

/// Additive model: channel k is A o [z^k (z^k)^* + sigma Delta^(k)], where
/// Delta^(k) has independent upper entries with real and imaginary parts
/// N(0, 1/2) each (unit entry variance), zero diagonal, drawn independently
/// across channels.
inline FrequencyStack additive_gaussian_stack(const PhaseVector& z, const ObservationGraph& g, double sigma,
                                              int k_max, Rng& rng) {
  require(sigma >= 0.0, ErrorKind::PreconditionViolation, "sigma must be nonnegative");
  require(k_max >= 1, ErrorKind::PreconditionViolation, "k_max must be >= 1");
  const int n = g.size();
  require(z.size() == n, ErrorKind::LengthMismatch, "truth length differs from graph size");
  const std::uint64_t key = rng();
  const double component_sd = std::sqrt(0.5);

  FrequencyStack stack;
  stack.graph = g;
  stack.metadata = {NoiseKind::Gaussian, sigma, key, std::nullopt};
  stack.channels.reserve(static_cast<std::size_t>(k_max));
  const Rng root(key);
  for (int k = 1; k <= k_max; ++k) {
    const PhaseVector zk = z.power(k);
    const Rng channel_root = root.stream(static_cast<std::uint64_t>(k));
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (auto [i, j] : g.edges()) {
      Rng edge_rng = channel_root.stream(detail::edge_stream_id(n, i, j));
      const double re = edge_rng.normal() * component_sd;
      const double im = edge_rng.normal() * component_sd;
      m(i, j) = zk[i] * std::conj(zk[j]) + sigma * Complex(re, im);
    }
    stack.channels.push_back(HermitianMatrix::from_upper(std::move(m)));
  }
  return stack;
}

/// Replaces each channel by (1/p)(H^(k) + p I).
inline FrequencyStack rescale_incomplete(const FrequencyStack& stack, double p) {
  require(p > 0.0 && p <= 1.0, ErrorKind::PreconditionViolation, "p must be in (0, 1]");
  FrequencyStack out;
  out.graph = stack.graph;
  out.metadata = stack.metadata;
  out.metadata.rescaled_p = p;
  out.channels.reserve(stack.channels.size());
  for (const auto& h : stack.channels) {
    ComplexMatrix m = h.dense();
    m.diagonal().array() += p;
    m /= p;
    out.channels.push_back(HermitianMatrix::from_upper(std::move(m)));
  }
  return out;
}

/// Edge density 2|E| / (n(n-1)), the fallback estimate of p.
inline double estimate_edge_probability(const ObservationGraph& g) { return g.density(); }

/// |x^* z| / n.
inline double correlation(const PhaseVector& x, const PhaseVector& z) {
  require(x.size() == z.size(), ErrorKind::LengthMismatch,
          "lengths " + std::to_string(x.size()) + " and " + std::to_string(z.size()));
  require(x.size() > 0, ErrorKind::PreconditionViolation, "empty phase vectors");
  const double c = std::abs(x.values().dot(z.values())) / static_cast<double>(x.size());
  return std::min(c, 1.0);
}

}  // namespace mfsync
