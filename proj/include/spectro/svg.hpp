#pragma once

#include <string>
#include <vector>

// Minimal deterministic SVG line plots: fixed-precision coordinates, linear or
// log axes, legend, and machine-parseable <polyline> points (tests read them
// back). Non-finite data is rejected with the offending indices.
namespace spectro {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  // empty = palette color by index
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 800;
  int height = 520;
};

std::string render_plot(const PlotSpec& spec, const std::vector<Series>& series);

void emit_plot(const std::string& path, const PlotSpec& spec,
               const std::vector<Series>& series);

}  // namespace spectro
