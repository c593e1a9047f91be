#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mfsync/core/error.hpp"
#include "mfsync/harness/sweep.hpp"
#include "mfsync/stack_io.hpp"

namespace mfsync::harness {

inline constexpr const char* kCsvHeader = "algorithm,lambda,k_max,trial,seed,correlation,wall_ms,summary,iqr,error";

namespace detail {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return mfsync::detail::format_double(v);
}

inline double parse_number(const std::string& s, const std::string& where) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return mfsync::detail::parse_double(s, where);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

/// Splits one CSV line, honoring double-quoted fields.
inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace detail

/// One row per trial (summary=0) followed, per cell, by one summary row
/// (summary=1) whose correlation is the median and iqr the interquartile
/// range; summary rows leave trial and seed empty and put the failure count
/// in the error column when nonzero.
inline void emit_csv(const SweepResult& result, std::ostream& out) {
  using detail::format_number;
  out << kCsvHeader << '\n';
  const auto summaries = summarize(result);
  std::size_t cell = 0;
  for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
    for (std::size_t li = 0; li < result.lambdas.size(); ++li) {
      for (std::size_t ki = 0; ki < result.k_values.size(); ++ki, ++cell) {
        for (int t = 0; t < result.trials; ++t) {
          const auto& r = result.at(a, li, ki, t);
          out << detail::csv_escape(r.algorithm) << ',' << format_number(r.lambda) << ',' << r.k_max << ',' << r.trial
              << ',' << r.seed << ',' << format_number(r.correlation) << ',' << format_number(r.wall_ms) << ",0,,"
              << detail::csv_escape(r.error) << '\n';
        }
        const auto& s = summaries[cell];
        out << detail::csv_escape(s.algorithm) << ',' << format_number(s.lambda) << ',' << s.k_max << ",,,"
            << format_number(s.median) << ',' << format_number(s.wall_ms) << ",1," << format_number(s.iqr) << ','
            << (s.failures ? std::to_string(s.failures) + " failed" : "") << '\n';
      }
    }
  }
}

inline void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path + " for writing");
  emit_csv(result, out);
  require(static_cast<bool>(out), ErrorKind::IoError, "failed writing " + path);
}

struct ParsedCsv {
  std::vector<TrialRecord> trials;
  std::vector<CellSummary> summaries;
};

inline ParsedCsv parse_csv(std::istream& in, const std::string& source = "<csv>") {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kCsvHeader, ErrorKind::IoError,
          source + ": missing or unexpected header");
  ParsedCsv out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(row);
    const auto f = detail::csv_split(line);
    require(f.size() == 10, ErrorKind::IoError, where + ": expected 10 columns, got " + std::to_string(f.size()));
    if (f[7] == "1") {
      CellSummary s;
      s.algorithm = f[0];
      s.lambda = detail::parse_number(f[1], where);
      s.k_max = mfsync::detail::parse_int(f[2], where);
      s.median = detail::parse_number(f[5], where);
      s.wall_ms = detail::parse_number(f[6], where);
      s.iqr = detail::parse_number(f[8], where);
      if (!f[9].empty()) s.failures = mfsync::detail::parse_int(f[9].substr(0, f[9].find(' ')), where);
      out.summaries.push_back(s);
    } else {
      require(f[7] == "0", ErrorKind::IoError, where + ": summary flag must be 0 or 1");
      TrialRecord r;
      r.algorithm = f[0];
      r.lambda = detail::parse_number(f[1], where);
      r.k_max = mfsync::detail::parse_int(f[2], where);
      r.trial = mfsync::detail::parse_int(f[3], where);
      r.seed = std::stoull(f[4]);
      r.correlation = detail::parse_number(f[5], where);
      r.wall_ms = detail::parse_number(f[6], where);
      r.error = f[9];
      out.trials.push_back(r);
    }
  }
  return out;
}

inline ParsedCsv parse_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + path);
  return parse_csv(in, path);
}

/// Viridis colormap, piecewise linear through 9 anchors, t clamped to [0, 1].
inline std::array<int, 3> viridis(double t) {
  static constexpr std::array<std::array<int, 3>, 9> anchors{{{68, 1, 84},
                                                              {71, 44, 122},
                                                              {59, 81, 139},
                                                              {44, 113, 142},
                                                              {33, 144, 141},
                                                              {39, 173, 129},
                                                              {92, 200, 99},
                                                              {170, 220, 50},
                                                              {253, 231, 37}}};
  if (std::isnan(t)) return {160, 160, 160};
  t = std::clamp(t, 0.0, 1.0) * 8.0;
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), 7);
  const double f = t - static_cast<double>(i);
  std::array<int, 3> c{};
  for (int ch = 0; ch < 3; ++ch)
    c[static_cast<std::size_t>(ch)] = static_cast<int>(std::lround(
        anchors[i][static_cast<std::size_t>(ch)] +
        f * (anchors[i + 1][static_cast<std::size_t>(ch)] - anchors[i][static_cast<std::size_t>(ch)])));
  return c;
}

namespace detail {

/// Cell edges around sorted centers: midpoints inside, half a gap outside.
inline std::vector<double> cell_edges(const std::vector<double>& centers) {
  std::vector<double> edges(centers.size() + 1);
  if (centers.size() == 1) {
    edges[0] = centers[0] - 0.5;
    edges[1] = centers[0] + 0.5;
    return edges;
  }
  for (std::size_t i = 1; i < centers.size(); ++i) edges[i] = 0.5 * (centers[i - 1] + centers[i]);
  edges.front() = centers.front() - (edges[1] - centers.front());
  edges.back() = centers.back() + (centers.back() - edges[centers.size() - 1]);
  return edges;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace detail

/// Static SVG heatmap of median correlation for one algorithm: lambda on x
/// (linear), k_max on y (log scale, larger k on top), colors on viridis over
/// the fixed range [0, 1]; failed cells are gray.
inline void emit_heatmap(const SweepResult& result, const std::string& algorithm, std::ostream& out) {
  const auto it = std::find(result.algorithms.begin(), result.algorithms.end(), algorithm);
  require(it != result.algorithms.end(), ErrorKind::PreconditionViolation, "no algorithm '" + algorithm + "' in result");
  const auto a = static_cast<std::size_t>(it - result.algorithms.begin());
  const auto summaries = summarize(result);
  const std::size_t nl = result.lambdas.size();
  const std::size_t nk = result.k_values.size();

  // Axis positions: sorted unique coordinates.
  std::vector<std::size_t> lorder(nl), korder(nk);
  for (std::size_t i = 0; i < nl; ++i) lorder[i] = i;
  for (std::size_t i = 0; i < nk; ++i) korder[i] = i;
  std::sort(lorder.begin(), lorder.end(), [&](auto x, auto y) { return result.lambdas[x] < result.lambdas[y]; });
  std::sort(korder.begin(), korder.end(), [&](auto x, auto y) { return result.k_values[x] < result.k_values[y]; });
  std::vector<double> xs, ys;
  const double finite_max = [&] {
    double m = 0.0;
    for (double l : result.lambdas)
      if (std::isfinite(l)) m = std::max(m, l);
    return m;
  }();
  for (auto i : lorder) xs.push_back(std::isfinite(result.lambdas[i]) ? result.lambdas[i] : finite_max + 1.0);
  for (auto i : korder) ys.push_back(std::log2(static_cast<double>(result.k_values[i])));
  const auto xe = detail::cell_edges(xs);
  const auto ye = detail::cell_edges(ys);

  const double left = 70, top = 40, plot_w = 480, plot_h = 360, bar_x = left + plot_w + 30;
  const double width = bar_x + 80, height = top + plot_h + 60;
  auto px = [&](double x) { return left + (x - xe.front()) / (xe.back() - xe.front()) * plot_w; };
  auto py = [&](double y) { return top + plot_h - (y - ye.front()) / (ye.back() - ye.front()) * plot_h; };
  auto color = [](double v) {
    const auto c = viridis(v);
    return "rgb(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + ")";
  };
  using detail::fixed;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\"" << fixed(height, 0)
      << "\" viewBox=\"0 0 " << fixed(width, 0) << ' ' << fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "  <title>" << detail::xml_escape(algorithm) << ": median correlation</title>\n";
  out << "  <text x=\"" << fixed(left + plot_w / 2, 1) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << detail::xml_escape(algorithm) << "</text>\n";
  for (std::size_t xi = 0; xi < nl; ++xi) {
    for (std::size_t yi = 0; yi < nk; ++yi) {
      const std::size_t li = lorder[xi], ki = korder[yi];
      const auto& s = summaries[(a * nl + li) * nk + ki];
      const double x0 = px(xe[xi]), x1 = px(xe[xi + 1]);
      const double y0 = py(ye[yi + 1]), y1 = py(ye[yi]);
      out << "  <rect class=\"cell\" x=\"" << fixed(x0, 2) << "\" y=\"" << fixed(y0, 2) << "\" width=\""
          << fixed(x1 - x0, 2) << "\" height=\"" << fixed(y1 - y0, 2) << "\" fill=\"" << color(s.median)
          << "\" data-lambda=\"" << detail::format_number(s.lambda) << "\" data-kmax=\"" << s.k_max
          << "\" data-median=\"" << detail::format_number(s.median) << "\"/>\n";
    }
  }
  out << "  <rect x=\"" << fixed(left, 2) << "\" y=\"" << fixed(top, 2) << "\" width=\"" << fixed(plot_w, 2)
      << "\" height=\"" << fixed(plot_h, 2) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t xi = 0; xi < nl; ++xi) {
    const double l = result.lambdas[lorder[xi]];
    out << "  <text x=\"" << fixed(px(xs[xi]), 2) << "\" y=\"" << fixed(top + plot_h + 16, 2)
        << "\" text-anchor=\"middle\">" << (std::isfinite(l) ? detail::format_number(l) : std::string("inf")) << "</text>\n";
  }
  for (std::size_t yi = 0; yi < nk; ++yi) {
    out << "  <text x=\"" << fixed(left - 8, 2) << "\" y=\"" << fixed(py(ys[yi]) + 4, 2) << "\" text-anchor=\"end\">"
        << result.k_values[korder[yi]] << "</text>\n";
  }
  out << "  <text x=\"" << fixed(left + plot_w / 2, 1) << "\" y=\"" << fixed(top + plot_h + 40, 1)
      << "\" text-anchor=\"middle\">lambda</text>\n";
  out << "  <text x=\"18\" y=\"" << fixed(top + plot_h / 2, 1) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fixed(top + plot_h / 2, 1) << ")\">k_max (log scale)</text>\n";
  // Color bar, 0 at the bottom.
  const int steps = 50;
  for (int s = 0; s < steps; ++s) {
    const double v = (s + 0.5) / steps;
    const double y = top + plot_h * (1.0 - static_cast<double>(s + 1) / steps);
    out << "  <rect x=\"" << fixed(bar_x, 2) << "\" y=\"" << fixed(y, 2) << "\" width=\"16\" height=\""
        << fixed(plot_h / steps + 0.5, 2) << "\" fill=\"" << color(v) << "\"/>\n";
  }
  for (double v : {0.0, 0.5, 1.0}) {
    out << "  <text x=\"" << fixed(bar_x + 22, 2) << "\" y=\"" << fixed(top + plot_h * (1.0 - v) + 4, 2) << "\">"
        << fixed(v, 1) << "</text>\n";
  }
  out << "</svg>\n";
}

inline void emit_heatmap(const SweepResult& result, const std::string& algorithm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path + " for writing");
  emit_heatmap(result, algorithm, out);
  require(static_cast<bool>(out), ErrorKind::IoError, "failed writing " + path);
}

}  // namespace mfsync::harness
