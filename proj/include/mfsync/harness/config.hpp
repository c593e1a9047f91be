#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfsync/core/error.hpp"
#include "mfsync/models.hpp"
#include "mfsync/so3/wigner.hpp"
#include "mfsync/sync.hpp"

namespace mfsync::harness {

enum class Group { U1, SO3 };
enum class GraphKind { Complete, ErdosRenyi };

inline const char* to_string(Group g) { return g == Group::U1 ? "u1" : "so3"; }
inline const char* to_string(GraphKind g) { return g == GraphKind::Complete ? "complete" : "erdos_renyi"; }

/// One algorithm entry. Fields irrelevant to `name` keep their defaults and
/// are not serialized.
struct AlgorithmConfig {
  std::string name;
  std::string label;
  int grid_size = kDefaultGridSize;
  int iterations = 0;
  ThresholdSchedule schedule{};
  int reps = 3;
  std::string init = "random";
  int m_samples = 1000;
  int refine_steps = 10;

  friend bool operator==(const AlgorithmConfig&, const AlgorithmConfig&) = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Group group = Group::U1;
  NoiseKind noise = NoiseKind::Corruption;
  int n = 100;
  GraphKind graph = GraphKind::Complete;
  double edge_probability = 1.0;
  std::vector<double> lambdas;
  std::vector<int> k_values;
  int trials = 20;
  std::uint64_t seed = 1;
  std::vector<AlgorithmConfig> algorithms;
  std::string output = "out";
  bool record_wall_time = false;
  /// 0 means the default (MFSYNC_THREADS or hardware concurrency).
  int threads = 0;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline const std::vector<std::string>& algorithm_names(Group g) {
  static const std::vector<std::string> u1{"spectral", "gpm", "ppe_spc", "ppe_spc3", "mfgpm"};
  static const std::vector<std::string> so3{"group_ppe", "group_refine"};
  return g == Group::U1 ? u1 : so3;
}

namespace detail {

inline std::string where(const std::string& source, const YAML::Mark& mark) {
  if (mark.is_null()) return source;
  return source + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
}

[[noreturn]] inline void fail(const std::string& source, const YAML::Node& node, const std::string& msg) {
  throw Error(ErrorKind::ConfigError, where(source, node.Mark()) + ": " + msg);
}

template <typename T>
T scalar(const std::string& source, const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail(source, node, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(source, node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
  }
}

inline void check_keys(const std::string& source, const YAML::Node& map, const std::set<std::string>& allowed,
                       const std::string& context) {
  if (!map.IsMap()) fail(source, map, context + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(source, kv.first, "unknown key '" + key + "' in " + context);
  }
}

/// Doubles accept YAML's .inf spelling.
inline double parse_lambda(const std::string& source, const YAML::Node& node) {
  if (!node.IsScalar()) fail(source, node, "lambda entries must be scalars");
  const std::string s = node.Scalar();
  if (s == ".inf" || s == ".Inf" || s == ".INF" || s == "inf") return std::numeric_limits<double>::infinity();
  return scalar<double>(source, node, "lambda");
}

inline int default_iterations(const std::string& name) {
  if (name == "gpm") return kDefaultGpmIterations;
  if (name == "mfgpm") return kDefaultMfgpmIterations;
  if (name == "group_refine") return 10;
  return 0;
}

inline AlgorithmConfig parse_algorithm(const std::string& source, const YAML::Node& node, Group group) {
  AlgorithmConfig a;
  if (node.IsScalar()) {
    a.name = node.Scalar();
  } else {
    check_keys(source, node,
               {"name", "label", "grid_size", "iterations", "schedule", "reps", "init", "m_samples", "refine_steps"},
               "algorithm entry");
    if (!node["name"]) fail(source, node, "algorithm entry needs 'name'");
    a.name = scalar<std::string>(source, node["name"], "name");
  }
  const auto& names = algorithm_names(group);
  if (std::find(names.begin(), names.end(), a.name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    fail(source, node.IsScalar() ? node : node["name"],
         "unknown algorithm '" + a.name + "' for group " + to_string(group) + " (expected one of: " + list + ")");
  }
  a.label = a.name;
  a.iterations = default_iterations(a.name);
  if (a.name == "group_refine") {
    a.schedule = {0.5, 0.5, 0.5, 1.0};
    a.init = "group_ppe";
  }
  if (!node.IsMap()) return a;
  if (node["label"]) a.label = scalar<std::string>(source, node["label"], "label");
  if (node["grid_size"]) a.grid_size = scalar<int>(source, node["grid_size"], "grid_size");
  if (node["iterations"]) a.iterations = scalar<int>(source, node["iterations"], "iterations");
  if (node["reps"]) a.reps = scalar<int>(source, node["reps"], "reps");
  if (node["init"]) a.init = scalar<std::string>(source, node["init"], "init");
  if (node["m_samples"]) a.m_samples = scalar<int>(source, node["m_samples"], "m_samples");
  if (node["refine_steps"]) a.refine_steps = scalar<int>(source, node["refine_steps"], "refine_steps");
  if (const auto s = node["schedule"]) {
    check_keys(source, s, {"initial", "target", "cap", "ramp_fraction"}, "schedule");
    if (s["initial"]) a.schedule.initial = scalar<double>(source, s["initial"], "initial");
    if (s["target"]) a.schedule.target = scalar<double>(source, s["target"], "target");
    if (s["cap"]) a.schedule.cap = scalar<double>(source, s["cap"], "cap");
    if (s["ramp_fraction"]) a.schedule.ramp_fraction = scalar<double>(source, s["ramp_fraction"], "ramp_fraction");
  }

  auto bad = [&](const char* key, const std::string& msg) { fail(source, node[key] ? node[key] : node, msg); };
  if (a.grid_size < 4) bad("grid_size", "grid_size must be >= 4");
  if ((a.name == "gpm" || a.name == "mfgpm" || a.name == "group_refine") && a.iterations < 1)
    bad("iterations", "iterations must be >= 1");
  if (a.reps < 1) bad("reps", "reps must be >= 1");
  if (a.m_samples < 100) bad("m_samples", "m_samples must be >= 100");
  if (a.refine_steps < 0) bad("refine_steps", "refine_steps must be >= 0");
  if (a.name == "mfgpm" && a.init != "random" && a.init != "ppe_spc")
    bad("init", "mfgpm init must be 'random' or 'ppe_spc'");
  if (a.name == "group_refine" && a.init != "random" && a.init != "group_ppe")
    bad("init", "group_refine init must be 'random' or 'group_ppe'");
  const auto& sch = a.schedule;
  if (a.name == "mfgpm") {
    try {
      sch.validate();
    } catch (const Error& e) {
      bad("schedule", e.what());
    }
  }
  if (a.name == "group_refine" && !(sch.initial >= 0.0 && sch.initial <= sch.target && sch.target <= sch.cap))
    bad("schedule", "schedule needs 0 <= initial <= target <= cap");
  return a;
}

}  // namespace detail

/// Parses and validates a YAML experiment config. Errors carry
/// "source:line:column:" prefixes.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::ConfigError, detail::where(source, e.mark) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw Error(ErrorKind::ConfigError, source + ": empty config");
  using detail::fail;
  using detail::scalar;
  detail::check_keys(source, root,
                     {"name", "group", "noise", "n", "graph", "lambda", "k_max", "trials", "seed", "algorithms",
                      "output", "record_wall_time", "threads"},
                     "config");
  ExperimentConfig cfg;
  auto need = [&](const char* key) {
    if (!root[key]) fail(source, root, std::string("missing required key '") + key + "'");
    return root[key];
  };
  if (root["name"]) cfg.name = scalar<std::string>(source, root["name"], "name");
  if (root["group"]) {
    const auto g = scalar<std::string>(source, root["group"], "group");
    if (g == "u1") cfg.group = Group::U1;
    else if (g == "so3") cfg.group = Group::SO3;
    else fail(source, root["group"], "group must be 'u1' or 'so3'");
  }
  {
    const auto node = need("noise");
    const auto s = scalar<std::string>(source, node, "noise");
    if (s == "corruption") cfg.noise = NoiseKind::Corruption;
    else if (s == "gaussian") cfg.noise = NoiseKind::Gaussian;
    else fail(source, node, "noise must be 'corruption' or 'gaussian'");
  }
  cfg.n = scalar<int>(source, need("n"), "n");
  if (cfg.n < 2) fail(source, root["n"], "n must be >= 2");
  if (const auto g = root["graph"]) {
    if (g.IsScalar()) {
      const auto s = g.Scalar();
      if (s == "complete") cfg.graph = GraphKind::Complete;
      else fail(source, g, "graph must be 'complete' or a mapping with kind: erdos_renyi and p");
    } else {
      detail::check_keys(source, g, {"kind", "p"}, "graph");
      const auto kind = g["kind"] ? scalar<std::string>(source, g["kind"], "kind") : std::string("complete");
      if (kind == "complete") {
        cfg.graph = GraphKind::Complete;
      } else if (kind == "erdos_renyi") {
        cfg.graph = GraphKind::ErdosRenyi;
        if (!g["p"]) fail(source, g, "erdos_renyi graph needs 'p'");
        cfg.edge_probability = scalar<double>(source, g["p"], "p");
        if (!(cfg.edge_probability > 0.0 && cfg.edge_probability <= 1.0)) fail(source, g["p"], "p must be in (0, 1]");
      } else {
        fail(source, g["kind"], "graph kind must be 'complete' or 'erdos_renyi'");
      }
    }
  }
  {
    const auto node = need("lambda");
    auto add = [&](const YAML::Node& v) {
      const double l = detail::parse_lambda(source, v);
      if (!(l > 0.0)) fail(source, v, "lambda must be positive");
      if (cfg.noise == NoiseKind::Corruption && std::isfinite(l) && l / std::sqrt(static_cast<double>(cfg.n)) > 1.0)
        fail(source, v, "corruption needs r = lambda / sqrt(n) <= 1");
      cfg.lambdas.push_back(l);
    };
    if (node.IsScalar()) add(node);
    else if (node.IsSequence()) for (const auto& v : node) add(v);
    else fail(source, node, "lambda must be a number or a list");
    if (cfg.lambdas.empty()) fail(source, node, "lambda grid is empty");
  }
  {
    const auto node = need("k_max");
    auto add = [&](const YAML::Node& v) {
      const int k = scalar<int>(source, v, "k_max");
      if (k < 1) fail(source, v, "k_max entries must be >= 1");
      if (cfg.group == Group::SO3 && k > so3::kMaxWignerDegree)
        fail(source, v, "so3 supports k_max <= " + std::to_string(so3::kMaxWignerDegree));
      cfg.k_values.push_back(k);
    };
    if (node.IsScalar()) add(node);
    else if (node.IsSequence()) for (const auto& v : node) add(v);
    else fail(source, node, "k_max must be an integer or a list");
    if (cfg.k_values.empty()) fail(source, node, "k_max grid is empty");
  }
  if (root["trials"]) {
    cfg.trials = scalar<int>(source, root["trials"], "trials");
    if (cfg.trials < 1) fail(source, root["trials"], "trials must be >= 1");
  }
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(source, root["seed"], "seed");
  if (root["output"]) cfg.output = scalar<std::string>(source, root["output"], "output");
  if (root["record_wall_time"]) cfg.record_wall_time = scalar<bool>(source, root["record_wall_time"], "record_wall_time");
  if (root["threads"]) {
    cfg.threads = scalar<int>(source, root["threads"], "threads");
    if (cfg.threads < 0) fail(source, root["threads"], "threads must be >= 0");
  }
  {
    const auto node = need("algorithms");
    if (!node.IsSequence() || node.size() == 0) fail(source, node, "algorithms must be a nonempty list");
    std::set<std::string> labels;
    for (const auto& a : node) {
      cfg.algorithms.push_back(detail::parse_algorithm(source, a, cfg.group));
      const auto& alg = cfg.algorithms.back();
      if (!labels.insert(alg.label).second) fail(source, a, "duplicate algorithm label '" + alg.label + "'");
      if (cfg.group == Group::U1 && alg.name != "spectral" && alg.name != "gpm") {
        for (int k : cfg.k_values) {
          if (alg.grid_size < 4 * k)
            fail(source, a, "grid_size " + std::to_string(alg.grid_size) + " < 4 * k_max (" + std::to_string(k) + ")");
        }
      }
    }
  }
  if (cfg.group == Group::SO3 && cfg.graph != GraphKind::Complete)
    fail(source, root["graph"], "so3 experiments use the complete graph");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::ConfigError, path + ": cannot open config");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

/// YAML text that parse_config maps back to an equal config.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto number = [&](double v) {
    if (std::isinf(v)) out << ".inf";
    else out << v;
  };
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << cfg.name;
  out << YAML::Key << "group" << YAML::Value << to_string(cfg.group);
  out << YAML::Key << "noise" << YAML::Value << to_string(cfg.noise);
  out << YAML::Key << "n" << YAML::Value << cfg.n;
  out << YAML::Key << "graph" << YAML::Value;
  if (cfg.graph == GraphKind::Complete) {
    out << "complete";
  } else {
    out << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << "erdos_renyi" << YAML::Key << "p" << YAML::Value;
    number(cfg.edge_probability);
    out << YAML::EndMap;
  }
  out << YAML::Key << "lambda" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double l : cfg.lambdas) number(l);
  out << YAML::EndSeq;
  out << YAML::Key << "k_max" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int k : cfg.k_values) out << k;
  out << YAML::EndSeq;
  out << YAML::Key << "trials" << YAML::Value << cfg.trials;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << cfg.output;
  out << YAML::Key << "record_wall_time" << YAML::Value << cfg.record_wall_time;
  out << YAML::Key << "threads" << YAML::Value << cfg.threads;
  out << YAML::Key << "algorithms" << YAML::Value << YAML::BeginSeq;
  for (const auto& a : cfg.algorithms) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << a.name;
    out << YAML::Key << "label" << YAML::Value << YAML::DoubleQuoted << a.label;
    const bool u1_harmonic = a.name == "ppe_spc" || a.name == "ppe_spc3" || a.name == "mfgpm";
    if (u1_harmonic) out << YAML::Key << "grid_size" << YAML::Value << a.grid_size;
    if (a.iterations > 0) out << YAML::Key << "iterations" << YAML::Value << a.iterations;
    if (a.name == "ppe_spc3") out << YAML::Key << "reps" << YAML::Value << a.reps;
    if (a.name == "mfgpm" || a.name == "group_refine") {
      out << YAML::Key << "init" << YAML::Value << a.init;
      out << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "initial" << YAML::Value << a.schedule.initial;
      out << YAML::Key << "target" << YAML::Value << a.schedule.target;
      out << YAML::Key << "cap" << YAML::Value << a.schedule.cap;
      out << YAML::Key << "ramp_fraction" << YAML::Value << a.schedule.ramp_fraction;
      out << YAML::EndMap;
    }
    if (a.name == "group_ppe" || a.name == "group_refine") {
      out << YAML::Key << "m_samples" << YAML::Value << a.m_samples;
      out << YAML::Key << "refine_steps" << YAML::Value << a.refine_steps;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace mfsync::harness
