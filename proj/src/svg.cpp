#include "spectro/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spectro/errors.hpp"

namespace spectro {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

// transform to plot space, honoring log axes (callers pre-validate positivity)
double axis_value(double v, bool log_axis) { return log_axis ? std::log10(v) : v; }

void check_series(const Series& s, bool log_x, bool log_y) {
  if (s.x.size() != s.y.size())
    throw ValidationError("series '" + s.label + "': x has " + std::to_string(s.x.size()) +
                          " points but y has " + std::to_string(s.y.size()));
  if (s.x.empty()) throw ValidationError("series '" + s.label + "' is empty");
  std::string bad;
  int nbad = 0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const bool finite = std::isfinite(s.x[i]) && std::isfinite(s.y[i]);
    const bool log_ok = (!log_x || s.x[i] > 0) && (!log_y || s.y[i] > 0);
    if (!finite || !log_ok) {
      if (nbad < 8) {
        if (!bad.empty()) bad += ", ";
        bad += std::to_string(i);
      }
      ++nbad;
    }
  }
  if (nbad > 0) {
    std::string reason = (log_x || log_y) ? "non-finite or non-positive (log axis)" : "non-finite";
    if (nbad > 8) bad += ", ...";
    throw ValidationError("series '" + s.label + "': " + reason + " values at indices [" + bad +
                          "] (" + std::to_string(nbad) + " total); cannot plot");
  }
}

}  // namespace

std::string render_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  if (series.empty()) throw ValidationError("emit_plot: no series to plot");
  for (const auto& s : series) check_series(s, spec.log_x, spec.log_y);

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double xv = axis_value(s.x[i], spec.log_x);
      const double yv = axis_value(s.y[i], spec.log_y);
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, yv);
      ymax = std::max(ymax, yv);
    }
  auto pad = [](double& lo, double& hi) {
    if (hi - lo < 1e-300) {
      const double p = std::max(1.0, std::abs(lo)) * 0.05;
      lo -= p;
      hi += p;
    } else {
      const double p = (hi - lo) * 0.05;
      lo -= p;
      hi += p;
    }
  };
  pad(xmin, xmax);
  pad(ymin, ymax);

  const double ml = 72, mr = 24, mt = 44, mb = 56;
  const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
  auto px = [&](double xv) { return ml + (xv - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double yv) { return mt + ph - (yv - ymin) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
  svg << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  if (!spec.title.empty())
    svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape(spec.title) << "</text>\n";

  const int nticks = 5;
  for (int i = 0; i < nticks; ++i) {
    const double t = static_cast<double>(i) / (nticks - 1);
    const double xv = xmin + t * (xmax - xmin);
    const double yv = ymin + t * (ymax - ymin);
    const double gx = px(xv), gy = py(yv);
    svg << "<line x1=\"" << fmt(gx) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(gx)
        << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << fmt(gx) << "\" y=\"" << fmt(mt + ph + 19)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt_tick(spec.log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
    svg << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(gy) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(gy) << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(gy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt_tick(spec.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  if (!spec.x_label.empty())
    svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(spec.height - 14.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(spec.x_label) << "</text>\n";
  if (!spec.y_label.empty())
    svg << "<text x=\"18\" y=\"" << fmt(mt + ph / 2) << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
        << fmt(mt + ph / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color =
        s.color.empty() ? kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))] : s.color;
    svg << "<polyline class=\"series\" data-label=\"" << escape(s.label)
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) svg << " ";
      svg << fmt(px(axis_value(s.x[i], spec.log_x))) << ","
          << fmt(py(axis_value(s.y[i], spec.log_y)));
    }
    svg << "\"/>\n";
    // legend entry
    const double ly = mt + 16 + 18 * static_cast<double>(si);
    svg << "<line x1=\"" << fmt(ml + pw - 150) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(ml + pw - 126) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(ml + pw - 120) << "\" y=\"" << fmt(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::string& path, const PlotSpec& spec,
               const std::vector<Series>& series) {
  const std::string body = render_plot(spec, series);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  out << body;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace spectro
