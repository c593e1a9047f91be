#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mfsync/core/error.hpp"
#include "mfsync/models.hpp"

namespace mfsync {

namespace detail {

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorKind::IoError,
          where + ": bad number '" + std::string(s) + "'");
  return v;
}

inline int parse_int(std::string_view s, const std::string& where) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorKind::IoError,
          where + ": bad integer '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Adjacency CSV: n lines of n comma-separated 0/1 values.
inline void write_adjacency_csv(const ObservationGraph& g, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path + " for writing");
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) out << (j ? "," : "") << (i != j && g.has_edge(i, j) ? '1' : '0');
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::IoError, "failed writing " + path);
}

inline ObservationGraph read_adjacency_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + path);
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(rows.size() + 1);
    std::vector<int> row;
    for (auto cell : detail::split_commas(line)) {
      const int v = detail::parse_int(cell, where);
      require(v == 0 || v == 1, ErrorKind::IoError, where + ": adjacency entries must be 0 or 1");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  require(n >= 1, ErrorKind::IoError, path + ": empty adjacency");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    require(static_cast<int>(rows[static_cast<std::size_t>(i)].size()) == n, ErrorKind::IoError,
            path + ":" + std::to_string(i + 1) + ": expected " + std::to_string(n) + " columns");
    require(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] == 0, ErrorKind::IoError,
            path + ": nonzero diagonal at row " + std::to_string(i + 1));
    for (int j = i + 1; j < n; ++j) {
      const int a = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      require(a == rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)], ErrorKind::IoError,
              path + ": adjacency not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (a) edges.emplace_back(i, j);
    }
  }
  return ObservationGraph::from_edges(n, edges);
}

/// Channel CSV with header k,i,j,re,im: every nonzero upper-triangle entry
/// (diagonal included) of every channel; k is 1-based, i and j 0-based.
inline void write_channels_csv(const FrequencyStack& stack, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path + " for writing");
  out << "k,i,j,re,im\n";
  const int n = stack.size();
  for (int k = 1; k <= stack.k_max(); ++k) {
    const auto& h = stack.channel(k);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const Complex v = h(i, j);
        if (v == Complex(0.0, 0.0)) continue;
        out << k << ',' << i << ',' << j << ',' << detail::format_double(v.real()) << ','
            << detail::format_double(v.imag()) << '\n';
      }
    }
  }
  require(static_cast<bool>(out), ErrorKind::IoError, "failed writing " + path);
}

/// Reads a stack back; channels are filled from the listed entries and
/// their Hermitian completion. Metadata kind is Derived.
inline FrequencyStack read_stack_csv(const std::string& adjacency_path, const std::string& channels_path) {
  FrequencyStack stack;
  stack.graph = read_adjacency_csv(adjacency_path);
  const int n = stack.graph.size();
  std::ifstream in(channels_path);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + channels_path);
  std::string line;
  std::getline(in, line);
  require(line == "k,i,j,re,im", ErrorKind::IoError, channels_path + ": expected header k,i,j,re,im");
  std::vector<ComplexMatrix> dense;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::string where = channels_path + ":" + std::to_string(row);
    const auto cells = detail::split_commas(line);
    require(cells.size() == 5, ErrorKind::IoError, where + ": expected 5 columns");
    const int k = detail::parse_int(cells[0], where);
    const int i = detail::parse_int(cells[1], where);
    const int j = detail::parse_int(cells[2], where);
    require(k >= 1, ErrorKind::IoError, where + ": k must be >= 1");
    require(i >= 0 && j >= i && j < n, ErrorKind::IoError, where + ": need 0 <= i <= j < n");
    require(i == j || stack.graph.has_edge(i, j), ErrorKind::IoError, where + ": entry off the graph");
    while (static_cast<int>(dense.size()) < k) dense.push_back(ComplexMatrix::Zero(n, n));
    dense[static_cast<std::size_t>(k - 1)](i, j) =
        Complex(detail::parse_double(cells[3], where), detail::parse_double(cells[4], where));
  }
  for (auto& m : dense) stack.channels.push_back(HermitianMatrix::from_upper(std::move(m)));
  return stack;
}

inline void write_stack_csv(const FrequencyStack& stack, const std::string& adjacency_path,
                            const std::string& channels_path) {
  write_adjacency_csv(stack.graph, adjacency_path);
  write_channels_csv(stack, channels_path);
}

}  // namespace mfsync
