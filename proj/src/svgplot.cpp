#include "evopipe/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace evopipe {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
  return ticks;
}

}  // namespace

void write_svg_chart(const PlotSpec& spec, const std::string& path) {
  Range xr, yr;
  for (const PlotSeries& s : spec.series) {
    for (double v : s.x) xr.include(v);
    for (double v : s.y) yr.include(v);
    for (double v : s.band_lo) yr.include(v);
    for (double v : s.band_hi) yr.include(v);
  }
  if (!(xr.lo <= xr.hi) || !(yr.lo <= yr.hi)) throw std::invalid_argument("svgplot: no finite data to plot");
  if (xr.lo == xr.hi) xr.hi = xr.lo + 1.0;
  if (yr.lo == yr.hi) {
    yr.lo -= 1.0;
    yr.hi += 1.0;
  }
  const double pad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= pad;
  yr.hi += pad;

  const auto sx = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight); };
  const auto sy = [&](double v) { return kHeight - kBottom - (v - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + spec.title + "</text>\n";

  for (double t : nice_ticks(xr.lo, xr.hi, 8)) {
    svg += "<line x1=\"" + num(sx(t)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(sx(t)) + "\" y2=\"" +
           num(kHeight - kBottom) + "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + num(sx(t)) + "\" y=\"" + num(kHeight - kBottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(t) + "</text>\n";
  }
  for (double t : nice_ticks(yr.lo, yr.hi, 8)) {
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(sy(t)) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" +
           num(sy(t)) + "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(t) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(t) + "</text>\n";
  }
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kWidth - kLeft - kRight) +
         "\" height=\"" + num(kHeight - kTop - kBottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + spec.x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 16 " + num(kHeight / 2) + ")\">" + spec.y_label + "</text>\n";

  double legend_y = kTop + 14;
  for (const PlotSeries& s : spec.series) {
    if (!s.band_lo.empty() && s.band_lo.size() == s.y.size() && s.band_hi.size() == s.y.size()) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i)
        pts += num(sx(s.x[i])) + "," + num(sy(s.band_hi[i])) + " ";
      for (std::size_t i = s.x.size(); i-- > 0;) pts += num(sx(s.x[i])) + "," + num(sy(s.band_lo[i])) + " ";
      svg += "<polygon points=\"" + pts + "\" fill=\"" + s.color + "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) pts += num(sx(s.x[i])) + "," + num(sy(s.y[i])) + " ";
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.8\"" +
           (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    svg += "<line x1=\"" + num(kWidth - kRight - 150) + "\" y1=\"" + num(legend_y) + "\" x2=\"" +
           num(kWidth - kRight - 125) + "\" y2=\"" + num(legend_y) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    svg += "<text x=\"" + num(kWidth - kRight - 118) + "\" y=\"" + num(legend_y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label + "</text>\n";
    legend_y += 18;
  }
  svg += "</svg>\n";

  std::ofstream f(path);
  if (!f) throw std::runtime_error("svgplot: cannot write " + path);
  f << svg;
}

}  // namespace evopipe
