#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "modescope/types.hpp"

namespace modescope {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Rounds a raw step up to the nearest 1/2/5 decade multiple.
inline double nice_step(double raw) {
  if (!(raw > 0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  if (frac <= 1.0) return mag;
  if (frac <= 2.0) return 2.0 * mag;
  if (frac <= 5.0) return 5.0 * mag;
  return 10.0 * mag;
}

}  // namespace detail

/// Minimal self-contained SVG line chart. Fixed palette, linear axes,
/// legend in the top-right corner.
inline std::string line_plot_svg(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel,
                                 const std::vector<PlotSeries>& series) {
  require(!series.empty(), "line_plot_svg: no series");
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  constexpr int width = 860, height = 520;
  constexpr int ml = 70, mr = 180, mt = 48, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const PlotSeries& s : series) {
    require(s.x.size() == s.y.size() && !s.x.empty(), "line_plot_svg: bad series");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmax - xmin <= 0) xmax = xmin + 1;
  if (ymax - ymin <= 0) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + " " + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(ml) + "\" y=\"28\" font-family=\"sans-serif\" "
         "font-size=\"17\" font-weight=\"bold\">" + title + "</text>\n";

  const double xstep = detail::nice_step((xmax - xmin) / 6.0);
  const double ystep = detail::nice_step((ymax - ymin) / 6.0);
  for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-9 * xstep; t += xstep) {
    const double x = px(t);
    svg += "<line x1=\"" + detail::svg_num(x) + "\" y1=\"" + std::to_string(mt) +
           "\" x2=\"" + detail::svg_num(x) + "\" y2=\"" + std::to_string(mt + (int)ph) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::svg_num(x) + "\" y=\"" + std::to_string(mt + (int)ph + 20) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           detail::tick_label(t) + "</text>\n";
  }
  for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-9 * ystep; t += ystep) {
    const double y = py(t);
    svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + detail::svg_num(y) +
           "\" x2=\"" + std::to_string(ml + (int)pw) + "\" y2=\"" + detail::svg_num(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + std::to_string(ml - 8) + "\" y=\"" + detail::svg_num(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
           detail::tick_label(t) + "</text>\n";
  }

  svg += "<rect x=\"" + std::to_string(ml) + "\" y=\"" + std::to_string(mt) + "\" width=\"" +
         std::to_string((int)pw) + "\" height=\"" + std::to_string((int)ph) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg += "<text x=\"" + std::to_string(ml + (int)(pw / 2)) + "\" y=\"" +
         std::to_string(height - 14) +
         "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" + xlabel +
         "</text>\n";
  svg += "<text x=\"20\" y=\"" + std::to_string(mt + (int)(ph / 2)) +
         "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 20 " + std::to_string(mt + (int)(ph / 2)) + ")\">" +
         ylabel + "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = palette[si % 8];
    std::string pts;
    for (size_t i = 0; i < series[si].x.size(); ++i) {
      pts += detail::svg_num(px(series[si].x[i]));
      pts += ",";
      pts += detail::svg_num(py(series[si].y[i]));
      pts += " ";
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    for (size_t i = 0; i < series[si].x.size(); ++i)
      svg += "<circle cx=\"" + detail::svg_num(px(series[si].x[i])) + "\" cy=\"" +
             detail::svg_num(py(series[si].y[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    const int ly = mt + 10 + static_cast<int>(si) * 20;
    svg += "<line x1=\"" + std::to_string(width - mr + 12) + "\" y1=\"" + std::to_string(ly) +
           "\" x2=\"" + std::to_string(width - mr + 36) + "\" y2=\"" + std::to_string(ly) +
           "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + std::to_string(width - mr + 42) + "\" y=\"" + std::to_string(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"13\">" + series[si].name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace modescope
