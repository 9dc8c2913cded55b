// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cpulab/trace_io.hpp"

namespace cpulab {
namespace {

constexpr double kWidth = 720, kHeight = 450;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Comments may not contain "--".
std::string comment_safe(std::string s) {
  for (std::size_t p; (p = s.find("--")) != std::string::npos;) s.replace(p, 2, "- ");
  return s;
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0) * mag;
}

std::string tick_label(double v) {
  const double a = std::fabs(v);
  if (a == 0.0) return "0";
  std::ostringstream os;
  if (a >= 1e5 || a < 1e-3) {
    os.precision(2);
    os << std::scientific << v;
  } else {
    os << format_double(v, a >= 100 ? 0 : a >= 1 ? 2 : 3);
  }
  return os.str();
}

struct Axis {
  double lo = 0, hi = 1, step = 0.2;
};

Axis make_axis(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::fabs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  Axis a;
  a.step = nice_step(hi - lo, 5);
  a.lo = std::floor(lo / a.step) * a.step;
  a.hi = std::ceil(hi / a.step) * a.step;
  return a;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : spec.series) {
    for (const auto& p : s.points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  const bool empty = !(xmin <= xmax);
  if (empty) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  ymin = std::min(ymin, 0.0);
  const Axis ax = make_axis(xmin, xmax);
  const Axis ay = make_axis(ymin, ymax);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };
  auto f = [](double v) { return format_double(v, 2); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (const auto& s : spec.series) {
    o << "<!-- data series=\"" << comment_safe(s.label) << "\" x=\"" << comment_safe(spec.x_label) << "\" y=\""
      << comment_safe(spec.y_label) << "\"\n";
    for (const auto& p : s.points) o << format_double(p.x, 6) << ',' << format_double(p.y, 6) << '\n';
    o << "-->\n";
  }
  o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << f(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(spec.title) << "</text>\n";

  // grid and ticks
  for (double v = ax.lo; v <= ax.hi + ax.step * 1e-6; v += ax.step) {
    o << "<line x1=\"" << f(px(v)) << "\" y1=\"" << f(kTop) << "\" x2=\"" << f(px(v)) << "\" y2=\""
      << f(kTop + ph) << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << f(px(v)) << "\" y=\"" << f(kTop + ph + 16) << "\" text-anchor=\"middle\">"
      << tick_label(v) << "</text>\n";
  }
  for (double v = ay.lo; v <= ay.hi + ay.step * 1e-6; v += ay.step) {
    o << "<line x1=\"" << f(kLeft) << "\" y1=\"" << f(py(v)) << "\" x2=\"" << f(kLeft + pw) << "\" y2=\""
      << f(py(v)) << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << f(kLeft - 6) << "\" y=\"" << f(py(v) + 4) << "\" text-anchor=\"end\">" << tick_label(v)
      << "</text>\n";
  }
  o << "<rect x=\"" << f(kLeft) << "\" y=\"" << f(kTop) << "\" width=\"" << f(pw) << "\" height=\"" << f(ph)
    << "\" fill=\"none\" stroke=\"#333\"/>\n";
  o << "<text x=\"" << f(kLeft + pw / 2) << "\" y=\"" << f(kHeight - 18) << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << f(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.y_label) << "</text>\n";
  if (empty) {
    o << "<text x=\"" << f(kLeft + pw / 2) << "\" y=\"" << f(kTop + ph / 2)
      << "\" text-anchor=\"middle\" fill=\"#888\">no data</text>\n";
  }

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::vector<Point> pts = s.points;
    std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    if (pts.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < pts.size(); ++k) o << (k ? " " : "") << f(px(pts[k].x)) << ',' << f(py(pts[k].y));
      o << "\"/>\n";
    }
    for (const auto& p : pts) {
      o << "<circle cx=\"" << f(px(p.x)) << "\" cy=\"" << f(py(p.y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 12 + 18.0 * static_cast<double>(i);
    o << "<rect x=\"" << f(kLeft + pw + 12) << "\" y=\"" << f(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
      << color << "\"/>\n";
    o << "<text x=\"" << f(kLeft + pw + 28) << "\" y=\"" << f(ly) << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace cpulab
