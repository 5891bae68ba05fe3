#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vqgap {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline double nice_step(double range) {
  if (!(range > 0)) return 1.0;
  const double raw = range / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  double nice = 10.0;
  if (frac <= 1.0) nice = 1.0;
  else if (frac <= 2.0) nice = 2.0;
  else if (frac <= 5.0) nice = 5.0;
  return nice * mag;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v + 0.0);  // +0.0 folds -0 into 0
  return buf;
}

}  // namespace detail

/// Deterministic fixed-layout SVG line plot; identical inputs give
/// identical bytes. Non-finite points break the polyline. Throws if no
/// series contains a finite point.
inline std::string line_plot_svg(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel, const std::vector<PlotSeries>& series,
                                 std::optional<double> reference = std::nullopt,
                                 const std::string& reference_name = "reference") {
  constexpr double width = 860, height = 520;
  constexpr double ml = 80, mr = 180, mt = 50, mb = 60;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  constexpr std::size_t n_colors = sizeof(palette) / sizeof(palette[0]);

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  bool any = false;
  auto grow = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    any = true;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) grow(x, y);
  if (reference && std::isfinite(*reference)) {
    if (any) grow(xmin, *reference), grow(xmax, *reference);
  }
  if (!any) throw std::runtime_error("line_plot_svg: no finite data points");
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"16\">" << title << "</text>\n";

  const double xstep = detail::nice_step(xmax - xmin);
  const double ystep = detail::nice_step(ymax - ymin);
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12 * xstep; t += xstep) {
    const double x = px(t);
    svg << "<line x1=\"" << detail::svg_num(x) << "\" y1=\"" << detail::svg_num(mt) << "\" x2=\""
        << detail::svg_num(x) << "\" y2=\"" << detail::svg_num(mt + ph)
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << detail::svg_num(x) << "\" y=\"" << detail::svg_num(mt + ph + 16)
        << "\" text-anchor=\"middle\">" << detail::tick_label(t) << "</text>\n";
  }
  for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12 * ystep; t += ystep) {
    const double y = py(t);
    svg << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(y) << "\" x2=\""
        << detail::svg_num(ml + pw) << "\" y2=\"" << detail::svg_num(y)
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << detail::svg_num(ml - 6) << "\" y=\"" << detail::svg_num(y + 4)
        << "\" text-anchor=\"end\">" << detail::tick_label(t) << "</text>\n";
  }
  svg << "</g>\n";

  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel
      << "</text>\n";
  svg << "<text x=\"20\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 "
      << mt + ph / 2 << ")\">" << ylabel << "</text>\n";

  if (reference && std::isfinite(*reference)) {
    const double y = py(*reference);
    svg << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(y) << "\" x2=\""
        << detail::svg_num(ml + pw) << "\" y2=\"" << detail::svg_num(y)
        << "\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n";
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = palette[i % n_colors];
    std::string path;
    bool pen_down = false;
    for (const auto& [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? "L" : "M");
      path += detail::svg_num(px(x)) + " " + detail::svg_num(py(y)) + " ";
      pen_down = true;
    }
    if (!path.empty())
      svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.8\"/>\n";
  }

  double ly = mt + 10;
  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = palette[i % n_colors];
    svg << "<line x1=\"" << width - mr + 12 << "\" y1=\"" << detail::svg_num(ly - 4) << "\" x2=\""
        << width - mr + 36 << "\" y2=\"" << detail::svg_num(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - mr + 42 << "\" y=\"" << detail::svg_num(ly) << "\">"
        << series[i].name << "</text>\n";
    ly += 18;
  }
  if (reference && std::isfinite(*reference)) {
    svg << "<line x1=\"" << width - mr + 12 << "\" y1=\"" << detail::svg_num(ly - 4) << "\" x2=\""
        << width - mr + 36 << "\" y2=\"" << detail::svg_num(ly - 4)
        << "\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n";
    svg << "<text x=\"" << width - mr + 42 << "\" y=\"" << detail::svg_num(ly) << "\">"
        << reference_name << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace vqgap
