#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "mfsync/core/error.hpp"
#include "mfsync/harness/config.hpp"
#include "mfsync/harness/report.hpp"
#include "mfsync/harness/sweep.hpp"
#include "mfsync/sync.hpp"

namespace mfsync::harness {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

struct SweepFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<int> trials;
};

namespace detail {

inline ExperimentConfig apply_overrides(ExperimentConfig cfg, const SweepFlags& flags) {
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out) cfg.output = *flags.out;
  if (flags.trials) {
    require(*flags.trials >= 1, ErrorKind::ConfigError, "--trials must be >= 1");
    cfg.trials = *flags.trials;
  }
  return cfg;
}

inline std::string file_safe(const std::string& label) {
  std::string out;
  for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

inline int run_sweep_command(const SweepFlags& flags, Group expected, std::ostream& out) {
  const ExperimentConfig cfg = apply_overrides(load_config(flags.config), flags);
  require(cfg.group == expected, ErrorKind::ConfigError,
          flags.config + ": group is " + to_string(cfg.group) + ", this command runs " + to_string(expected) +
              " experiments");
  const unsigned threads = flags.threads.value_or(cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : 0u);
  const SweepResult result = run_sweep(cfg, threads);
  std::filesystem::create_directories(cfg.output);
  const std::filesystem::path dir(cfg.output);
  emit_csv(result, (dir / "results.csv").string());
  {
    std::ofstream resolved(dir / "config.yaml");
    resolved << serialize_config(cfg);
  }
  for (const auto& label : result.algorithms) emit_heatmap(result, label, (dir / ("heatmap_" + file_safe(label) + ".svg")).string());

  out << "algorithm lambda k_max median iqr failures\n";
  for (const auto& s : summarize(result)) {
    out << s.algorithm << ' ' << harness::detail::format_number(s.lambda) << ' ' << s.k_max << ' ' << std::fixed
        << std::setprecision(4) << s.median << ' ' << s.iqr << ' ' << s.failures << '\n';
    out.unsetf(std::ios::floatfield);
  }
  out << "wrote " << (dir / "results.csv").string() << '\n';
  return kExitOk;
}

struct DemoFlags {
  std::uint64_t seed = 7;
  int n = 100;
  double lambda = 1.2;
  int k_max = 16;
  std::string noise = "corruption";
  unsigned threads = 1;
};

inline int run_demo(const DemoFlags& f, std::ostream& out) {
  require(f.n >= 2, ErrorKind::ConfigError, "--n must be >= 2");
  require(f.k_max >= 1, ErrorKind::ConfigError, "--k-max must be >= 1");
  require(f.lambda > 0.0, ErrorKind::ConfigError, "--lambda must be positive");
  require(f.noise == "corruption" || f.noise == "gaussian", ErrorKind::ConfigError,
          "--noise must be corruption or gaussian");
  const Rng root(f.seed);
  Rng truth_rng = root.stream(stream_tag("truth"));
  Rng noise_rng = root.stream(stream_tag("noise"));
  Rng init_rng = root.stream(stream_tag("init"));
  const PhaseVector z = sample_ground_truth(f.n, truth_rng);
  const auto graph = ObservationGraph::complete(f.n);
  const double root_n = std::sqrt(static_cast<double>(f.n));
  const bool corruption = f.noise == "corruption";
  require(!corruption || f.lambda <= root_n, ErrorKind::ConfigError, "corruption needs lambda <= sqrt(n)");
  const FrequencyStack stack = corruption ? random_corruption_stack(z, graph, f.lambda / root_n, f.k_max, noise_rng)
                                          : additive_gaussian_stack(z, graph, root_n / f.lambda, f.k_max, noise_rng);
  const PhaseVector init = sample_ground_truth(f.n, init_rng);
  PpeOptions ppe;
  ppe.threads = f.threads;
  MfgpmOptions mf;
  mf.grid_size = f.k_max * 4 > kDefaultGridSize ? 4 * f.k_max : kDefaultGridSize;
  ppe.grid_size = mf.grid_size;

  out << "noise " << f.noise << ", n " << f.n << ", lambda " << f.lambda << ", k_max " << f.k_max << ", seed "
      << f.seed << '\n';
  out << std::fixed << std::setprecision(6);
  out << "spectral  " << correlation(spectral_sync(stack.channel(1)), z) << '\n';
  out << "gpm       " << correlation(gpm(stack.channel(1), init), z) << '\n';
  out << "ppe_spc   " << correlation(ppe_spc(stack, ppe).estimate, z) << '\n';
  out << "mfgpm     " << correlation(mfgpm(stack, init, mf), z) << '\n';
  return kExitOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Multi-frequency phase and rotation synchronization experiments", "mfsync"};
  app.require_subcommand(1);

  SweepFlags sweep_flags, so3_flags;
  auto add_sweep_flags = [](CLI::App* cmd, SweepFlags& f) {
    cmd->add_option("--config", f.config, "experiment config (YAML)")->required();
    cmd->add_option("--seed", f.seed, "override the base seed");
    cmd->add_option("--out", f.out, "override the output directory");
    cmd->add_option("--threads", f.threads, "worker threads (default: MFSYNC_THREADS or all cores)");
    cmd->add_option("--trials", f.trials, "override the trial count");
  };
  auto* sweep = app.add_subcommand("sweep", "run a U(1) parameter sweep and write CSV and heatmaps");
  add_sweep_flags(sweep, sweep_flags);
  auto* so3_sweep = app.add_subcommand("so3-sweep", "run an SO(3) parameter sweep and write CSV and heatmaps");
  add_sweep_flags(so3_sweep, so3_flags);

  detail::DemoFlags demo_flags;
  auto* demo = app.add_subcommand("demo", "one seeded run printing correlations of all U(1) methods");
  demo->add_option("--seed", demo_flags.seed, "seed")->capture_default_str();
  demo->add_option("--n", demo_flags.n, "number of vertices")->capture_default_str();
  demo->add_option("--lambda", demo_flags.lambda, "signal level")->capture_default_str();
  demo->add_option("--k-max", demo_flags.k_max, "number of frequency channels")->capture_default_str();
  demo->add_option("--noise", demo_flags.noise, "corruption or gaussian")->capture_default_str();
  demo->add_option("--threads", demo_flags.threads, "worker threads")->capture_default_str();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "check a config file and report the first problem");
  validate->add_option("--config", validate_path, "experiment config (YAML)")->required();

  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (sweep->parsed()) return detail::run_sweep_command(sweep_flags, Group::U1, out);
    if (so3_sweep->parsed()) return detail::run_sweep_command(so3_flags, Group::SO3, out);
    if (demo->parsed()) return detail::run_demo(demo_flags, out);
    if (validate->parsed()) {
      const ExperimentConfig cfg = load_config(validate_path);
      out << validate_path << ": ok (" << to_string(cfg.group) << ", " << cfg.lambdas.size() << " lambda x "
          << cfg.k_values.size() << " k_max x " << cfg.trials << " trials, " << cfg.algorithms.size()
          << " algorithms)\n";
      return kExitOk;
    }
    if (version->parsed()) {
      out << "mfsync " << kVersion << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::ConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace mfsync::harness
