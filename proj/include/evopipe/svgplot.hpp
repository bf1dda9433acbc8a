#pragma once

#include <string>
#include <vector>

namespace evopipe {

// Minimal SVG line charts for the plot subcommand; data-driven and
// dependency-free so chart bytes depend only on the inputs.
struct PlotSeries {
  std::string label;
  std::string color = "#1f6fb2";
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band_lo;  // optional shaded band (same length as y)
  std::vector<double> band_hi;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

void write_svg_chart(const PlotSpec& spec, const std::string& path);

}  // namespace evopipe
