#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mfsync/core/parallel.hpp"
#include "mfsync/core/rng.hpp"
#include "mfsync/groupsync.hpp"
#include "mfsync/harness/config.hpp"
#include "mfsync/models.hpp"
#include "mfsync/sync.hpp"

namespace mfsync::harness {

struct TrialRecord {
  std::string algorithm;
  double lambda = 0.0;
  int k_max = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  /// NaN when the algorithm failed; `error` then holds the message.
  double correlation = 0.0;
  double wall_ms = 0.0;
  std::string error;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct CellSummary {
  std::string algorithm;
  double lambda = 0.0;
  int k_max = 0;
  double median = 0.0;
  double iqr = 0.0;
  double wall_ms = 0.0;
  int failures = 0;
};

/// Trial records ordered by (algorithm, lambda index, k_max index, trial).
struct SweepResult {
  std::vector<std::string> algorithms;
  std::vector<double> lambdas;
  std::vector<int> k_values;
  int trials = 0;
  std::vector<TrialRecord> records;

  const TrialRecord& at(std::size_t alg, std::size_t li, std::size_t ki, int trial) const {
    const std::size_t idx =
        ((alg * lambdas.size() + li) * k_values.size() + ki) * static_cast<std::size_t>(trials) + static_cast<std::size_t>(trial);
    return records.at(idx);
  }
};

/// Linear-interpolation quantile (type 7) of sorted values.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

/// Summaries over the finite correlations of each cell, in record order.
inline std::vector<CellSummary> summarize(const SweepResult& result) {
  std::vector<CellSummary> out;
  for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
    for (std::size_t li = 0; li < result.lambdas.size(); ++li) {
      for (std::size_t ki = 0; ki < result.k_values.size(); ++ki) {
        std::vector<double> corr, wall;
        int failures = 0;
        for (int t = 0; t < result.trials; ++t) {
          const auto& r = result.at(a, li, ki, t);
          wall.push_back(r.wall_ms);
          if (std::isnan(r.correlation)) ++failures;
          else corr.push_back(r.correlation);
        }
        std::sort(corr.begin(), corr.end());
        CellSummary s;
        s.algorithm = result.algorithms[a];
        s.lambda = result.lambdas[li];
        s.k_max = result.k_values[ki];
        s.median = quantile_sorted(corr, 0.5);
        s.iqr = quantile_sorted(corr, 0.75) - quantile_sorted(corr, 0.25);
        s.wall_ms = median(wall);
        s.failures = failures;
        out.push_back(s);
      }
    }
  }
  return out;
}

/// Seed of one trial, derived only from its own coordinates.
inline std::uint64_t trial_seed(std::uint64_t base, std::size_t lambda_index, std::size_t k_index, int trial) {
  std::uint64_t key = Rng::derive_key(base, lambda_index);
  key = Rng::derive_key(key, k_index);
  return Rng::derive_key(key, static_cast<std::uint64_t>(trial));
}

namespace detail {

struct AlgorithmOutcome {
  double correlation = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  std::string error;
};

template <typename Fn>
AlgorithmOutcome timed(Fn&& fn) {
  AlgorithmOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    out.correlation = std::clamp(fn(), 0.0, 1.0);
  } catch (const std::exception& e) {
    out.correlation = std::numeric_limits<double>::quiet_NaN();
    out.error = e.what();
  }
  out.wall_ms = mfsync::detail::elapsed_ms(start);
  return out;
}

/// Runs every configured U(1) algorithm on one trial's shared data.
inline std::vector<AlgorithmOutcome> run_u1_trial(const ExperimentConfig& cfg, double lambda, int k_max,
                                                  std::uint64_t seed) {
  const Rng root(seed);
  Rng truth_rng = root.stream(stream_tag("truth"));
  Rng graph_rng = root.stream(stream_tag("graph"));
  Rng noise_rng = root.stream(stream_tag("noise"));
  Rng init_rng = root.stream(stream_tag("init"));
  const int n = cfg.n;
  const PhaseVector z = sample_ground_truth(n, truth_rng);
  const ObservationGraph graph =
      cfg.graph == GraphKind::Complete ? ObservationGraph::complete(n) : erdos_renyi(n, cfg.edge_probability, graph_rng);
  const double root_n = std::sqrt(static_cast<double>(n));
  const FrequencyStack stack =
      cfg.noise == NoiseKind::Corruption
          ? random_corruption_stack(z, graph, std::isinf(lambda) ? 1.0 : lambda / root_n, k_max, noise_rng)
          : additive_gaussian_stack(z, graph, std::isinf(lambda) ? 0.0 : root_n / lambda, k_max, noise_rng);
  const PhaseVector init = sample_ground_truth(n, init_rng);

  std::optional<double> p;
  if (cfg.graph == GraphKind::ErdosRenyi) p = cfg.edge_probability;
  std::vector<AlgorithmOutcome> out;
  for (const auto& a : cfg.algorithms) {
    PpeOptions ppe;
    ppe.grid_size = a.grid_size;
    ppe.edge_probability = p;
    ppe.keep_offsets = false;
    if (a.name == "spectral") {
      out.push_back(timed([&] { return correlation(spectral_sync(stack.channel(1)), z); }));
    } else if (a.name == "gpm") {
      out.push_back(timed([&] { return correlation(gpm(stack.channel(1), init, a.iterations), z); }));
    } else if (a.name == "ppe_spc") {
      out.push_back(timed([&] { return correlation(ppe_spc(stack, ppe).estimate, z); }));
    } else if (a.name == "ppe_spc3") {
      out.push_back(timed([&] { return correlation(ppe_spc_repeated(stack, k_max, a.reps, ppe).estimate, z); }));
    } else if (a.name == "mfgpm") {
      out.push_back(timed([&] {
        MfgpmOptions opt;
        opt.schedule = a.schedule;
        opt.iterations = a.iterations;
        opt.grid_size = a.grid_size;
        const PhaseVector start = a.init == "ppe_spc" ? ppe_spc(stack, ppe).estimate : init;
        return correlation(mfgpm(stack, start, opt), z);
      }));
    } else {
      throw Error(ErrorKind::ConfigError, "algorithm '" + a.name + "' is not a u1 algorithm");
    }
  }
  return out;
}

inline std::vector<AlgorithmOutcome> run_so3_trial(const ExperimentConfig& cfg, double lambda, int k_max,
                                                   std::uint64_t seed) {
  const Rng root(seed);
  Rng truth_rng = root.stream(stream_tag("truth"));
  Rng noise_rng = root.stream(stream_tag("noise"));
  Rng init_rng = root.stream(stream_tag("init"));
  const auto truth = so3::sample_rotations(cfg.n, truth_rng);
  const RotationStack stack =
      cfg.noise == NoiseKind::Corruption
          ? group_stack_corruption(truth, std::isinf(lambda) ? 1.0 : lambda / std::sqrt(static_cast<double>(cfg.n)),
                                   k_max, noise_rng)
          : group_stack_gaussian(truth, std::vector<double>(static_cast<std::size_t>(k_max), lambda), noise_rng);
  const auto random_init = so3::sample_rotations(cfg.n, init_rng);

  std::vector<AlgorithmOutcome> out;
  for (std::size_t idx = 0; idx < cfg.algorithms.size(); ++idx) {
    const auto& a = cfg.algorithms[idx];
    Rng alg_rng = root.stream(Rng::derive_key(stream_tag("algorithm"), idx));
    GroupPpeOptions ppe;
    ppe.m_samples = a.m_samples;
    ppe.refine_steps = a.refine_steps;
    if (a.name == "group_ppe") {
      out.push_back(timed([&] { return group_correlation(group_ppe(stack, alg_rng, ppe).rotations, truth); }));
    } else if (a.name == "group_refine") {
      out.push_back(timed([&] {
        const auto start = a.init == "group_ppe" ? group_ppe(stack, alg_rng, ppe).rotations : random_init;
        GroupRefineOptions opt;
        opt.schedule = a.schedule;
        opt.iterations = a.iterations;
        opt.m_samples = a.m_samples;
        return group_correlation(group_refine(stack, start, alg_rng, opt), truth);
      }));
    } else {
      throw Error(ErrorKind::ConfigError, "algorithm '" + a.name + "' is not an so3 algorithm");
    }
  }
  return out;
}

}  // namespace detail

/// Runs the full (lambda, k_max, trial) grid. Every trial shares one truth,
/// graph, noise draw and random initialization across algorithms. Trials run
/// in parallel; results are stored by index so output is independent of
/// scheduling. Wall times are kept only when cfg.record_wall_time is set.
inline SweepResult run_sweep(const ExperimentConfig& cfg, unsigned threads = 0) {
  if (threads == 0) threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : default_thread_count();
  SweepResult result;
  for (const auto& a : cfg.algorithms) result.algorithms.push_back(a.label);
  result.lambdas = cfg.lambdas;
  result.k_values = cfg.k_values;
  result.trials = cfg.trials;
  const std::size_t algs = cfg.algorithms.size();
  const std::size_t lambdas = cfg.lambdas.size();
  const std::size_t ks = cfg.k_values.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  result.records.resize(algs * lambdas * ks * trials);

  parallel_for(lambdas * ks * trials, threads, [&](std::size_t task) {
    const std::size_t t = task % trials;
    const std::size_t ki = (task / trials) % ks;
    const std::size_t li = task / (trials * ks);
    const double lambda = cfg.lambdas[li];
    const int k_max = cfg.k_values[ki];
    const std::uint64_t seed = trial_seed(cfg.seed, li, ki, static_cast<int>(t));
    std::vector<detail::AlgorithmOutcome> outcomes;
    try {
      outcomes = cfg.group == Group::U1 ? detail::run_u1_trial(cfg, lambda, k_max, seed)
                                        : detail::run_so3_trial(cfg, lambda, k_max, seed);
    } catch (const std::exception& e) {
      // Data generation failed: every algorithm in this trial records it.
      outcomes.assign(algs, detail::AlgorithmOutcome{std::numeric_limits<double>::quiet_NaN(), 0.0, e.what()});
    }
    for (std::size_t a = 0; a < algs; ++a) {
      auto& rec = result.records[((a * lambdas + li) * ks + ki) * trials + t];
      rec.algorithm = cfg.algorithms[a].label;
      rec.lambda = lambda;
      rec.k_max = k_max;
      rec.trial = static_cast<int>(t);
      rec.seed = seed;
      rec.correlation = outcomes[a].correlation;
      rec.wall_ms = cfg.record_wall_time ? outcomes[a].wall_ms : 0.0;
      rec.error = outcomes[a].error;
    }
  });
  return result;
}

}  // namespace mfsync::harness
