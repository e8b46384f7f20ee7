#pragma once

// Minimal SVG line charts of RSE against iteration or seconds, read from
// trace.csv. One polyline per method; each is the mean over trials with
// every trial's last value carried forward.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rdr/bench.hpp"
#include "rdr/errors.hpp"

namespace rdr {

enum class PlotAxis { Iteration, Seconds };

struct Series {
  std::string method;
  std::vector<double> x;
  std::vector<double> y;
};

/// Trial-averaged series per method, in first-appearance order. A point whose
/// mean equals the previous one is dropped, so a series stops once every
/// trial has finished.
inline std::vector<Series> average_series(const std::vector<TraceRow>& rows, PlotAxis axis,
                                          std::size_t max_points = 1500) {
  if (rows.empty()) throw ParseError("trace has no rows");
  std::vector<std::string> order;
  std::map<std::string, std::map<unsigned, std::vector<std::pair<double, double>>>> by;
  for (const auto& r : rows) {
    if (!by.count(r.method)) order.push_back(r.method);
    const double x = axis == PlotAxis::Iteration ? static_cast<double>(r.iteration) : r.seconds;
    by[r.method][r.trial].push_back({x, r.rse});
  }

  std::vector<Series> out;
  for (const auto& name : order) {
    auto& trials = by[name];
    std::vector<double> grid;
    for (auto& [t, pts] : trials) {
      std::stable_sort(pts.begin(), pts.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& p : pts) grid.push_back(p.first);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() > max_points) {
      std::vector<double> thin;
      const double step = static_cast<double>(grid.size() - 1) / (max_points - 1);
      for (std::size_t k = 0; k < max_points; ++k)
        thin.push_back(grid[static_cast<std::size_t>(std::llround(k * step))]);
      thin.erase(std::unique(thin.begin(), thin.end()), thin.end());
      grid = std::move(thin);
    }

    Series s;
    s.method = name;
    std::vector<std::size_t> cursor(trials.size(), 0);
    for (double g : grid) {
      double sum = 0.0;
      std::size_t k = 0;
      for (auto& [t, pts] : trials) {
        std::size_t& c = cursor[k++];
        while (c + 1 < pts.size() && pts[c + 1].first <= g) ++c;
        sum += pts[c].second;
      }
      const double mean = sum / static_cast<double>(trials.size());
      if (!s.y.empty() && s.y.back() == mean) continue;
      s.x.push_back(g);
      s.y.push_back(mean);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

inline std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace detail

inline std::string render_svg(const std::vector<Series>& series, PlotAxis axis) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const double W = 720, H = 480, L = 80, R = 170, T = 30, B = 60;
  const double pw = W - L - R, ph = H - T - B;

  double xmax = 0.0, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmax = std::max(xmax, s.x[i]);
      if (s.y[i] > 0.0) {
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  if (!(xmax > 0.0)) xmax = 1.0;
  if (!std::isfinite(ymin)) ymin = ymax = 1.0;
  double lo = std::floor(std::log10(ymin)), hi = std::ceil(std::log10(ymax));
  if (hi <= lo) hi = lo + 1;
  const double floor_y = std::pow(10.0, lo);

  auto px = [&](double x) { return L + pw * x / xmax; };
  auto py = [&](double y) {
    const double ly = std::log10(std::max(y, floor_y));
    return T + ph * (hi - ly) / (hi - lo);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const int decades = static_cast<int>(hi - lo);
  const int dstep = std::max(1, decades / 8);
  for (int d = 0; d <= decades; d += dstep) {
    const double yv = T + ph * d / (hi - lo);
    o << "<line x1=\"" << L << "\" y1=\"" << yv << "\" x2=\"" << L + pw << "\" y2=\"" << yv
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << yv + 4 << "\" text-anchor=\"end\">1e"
      << static_cast<int>(hi) - d << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double xv = xmax * k / 5.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">"
      << detail::fmt(xv) << "</text>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
    << (axis == PlotAxis::Iteration ? "iteration" : "seconds") << "</text>\n";
  o << "<text x=\"18\" y=\"" << T + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << T + ph / 2 << ")\">RSE</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof(kColors) / sizeof(*kColors))];
    o << "<polyline class=\"series\" data-method=\"" << detail::xml_escape(s.method)
      << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      o << (i ? " " : "") << detail::fmt(px(s.x[i]), 10) << ',' << detail::fmt(py(s.y[i]), 12);
    o << "\"/>\n";
    const double ly = T + 12 + 18.0 * k;
    o << "<line x1=\"" << L + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << L + pw + 36
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text class=\"legend\" x=\"" << L + pw + 42 << "\" y=\"" << ly << "\">"
      << detail::xml_escape(s.method) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// Writes rse_vs_iteration.svg and rse_vs_seconds.svg; returns their paths.
inline std::vector<std::string> plot_trace(const std::string& trace_path, const std::string& out_dir) {
  const auto rows = read_trace_csv(trace_path);
  if (rows.empty()) throw ParseError("trace '" + trace_path + "' has no rows");
  std::vector<std::string> written;
  for (auto [axis, name] : {std::pair{PlotAxis::Iteration, "rse_vs_iteration.svg"},
                            std::pair{PlotAxis::Seconds, "rse_vs_seconds.svg"}}) {
    const std::string path = out_dir + "/" + name;
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << render_svg(average_series(rows, axis), axis);
    written.push_back(path);
  }
  return written;
}

}  // namespace rdr
