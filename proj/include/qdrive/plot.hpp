#pragma once

// Minimal SVG line plots generated from the same records as the CSV files.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qdrive/io.hpp"

namespace qdrive::plot {

struct Line {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

namespace detail {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string svg(const std::vector<Line>& lines, const Axes& axes) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  auto tx = [&](double v) { return axes.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return axes.log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& l : lines) {
    for (std::size_t i = 0; i < l.x.size(); ++i) {
      if (!std::isfinite(tx(l.x[i])) || !std::isfinite(ty(l.y[i]))) continue;
      x0 = std::min(x0, tx(l.x[i]));
      x1 = std::max(x1, tx(l.x[i]));
      y0 = std::min(y0, ty(l.y[i]));
      y1 = std::max(y1, ty(l.y[i]));
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#000000"};

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + io::number(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::escape(axes.title) + "</text>\n";
  s += "<rect x=\"" + io::number(L) + "\" y=\"" + io::number(T) + "\" width=\"" + io::number(W - L - R) +
       "\" height=\"" + io::number(H - T - B) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + io::number(L + (W - L - R) / 2) + "\" y=\"" + io::number(H - 12) +
       "\" text-anchor=\"middle\" font-size=\"12\">" + detail::escape(axes.x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + io::number(T + (H - T - B) / 2) + "\" font-size=\"12\" transform=\"rotate(-90 16 " +
       io::number(T + (H - T - B) / 2) + ")\" text-anchor=\"middle\">" + detail::escape(axes.y_label) + "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double vx = axes.log_x ? std::pow(10.0, fx) : fx;
    const double vy = axes.log_y ? std::pow(10.0, fy) : fy;
    s += "<text x=\"" + io::number(px(vx)) + "\" y=\"" + io::number(H - B + 16) +
         "\" text-anchor=\"middle\" font-size=\"10\">" + io::number(std::round(vx * 1000) / 1000) + "</text>\n";
    s += "<text x=\"" + io::number(L - 6) + "\" y=\"" + io::number(py(vy) + 3) +
         "\" text-anchor=\"end\" font-size=\"10\">" + io::number(std::round(vy * 1000) / 1000) + "</text>\n";
  }
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto& l = lines[li];
    const char* c = colors[li % 6];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < l.x.size(); ++i) {
      if (!std::isfinite(tx(l.x[i])) || !std::isfinite(ty(l.y[i]))) continue;
      s += io::number(px(l.x[i])) + "," + io::number(py(l.y[i])) + " ";
    }
    s += "\"/>\n";
    s += "<text x=\"" + io::number(W - R + 10) + "\" y=\"" + io::number(T + 14 + 16.0 * li) + "\" font-size=\"11\" fill=\"" +
         c + "\">" + detail::escape(l.name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace qdrive::plot
