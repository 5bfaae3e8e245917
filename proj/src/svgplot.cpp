#include "pqlm/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pqlm {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
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

}  // namespace

std::string render_line_svg(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<PlotSeries>& series) {
  std::size_t max_len = 0;
  double y_min = 0.0, y_max = 1.0;
  bool any = false;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.ys.size());
    for (double y : s.ys) {
      if (!std::isfinite(y)) continue;
      if (!any) {
        y_min = y_max = y;
        any = true;
      } else {
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (max_len < 1) throw std::invalid_argument("render_line_svg: no data");
  if (y_max == y_min) {
    y_max += 0.5;
    y_min -= 0.5;
  }
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const double x_span = max_len > 1 ? static_cast<double>(max_len - 1) : 1.0;
  const auto px = [&](std::size_t i) {
    return kMarginLeft + plot_w * static_cast<double>(i) / x_span;
  };
  const auto py = [&](double y) {
    return kMarginTop + plot_h * (1.0 - (y - y_min) / (y_max - y_min));
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape_xml(title) << "</text>\n";

  // Axes with min/mid/max ticks.
  svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
      << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 2; ++t) {
    const double frac = t / 2.0;
    const double yv = y_min + (y_max - y_min) * frac;
    const double yy = py(yv);
    svg << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(yy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv)
        << "</text>\n";
    const std::size_t xi = static_cast<std::size_t>(frac * x_span + 0.5);
    svg << "<text x=\"" << fmt(px(xi)) << "\" y=\"" << kMarginTop + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xi
        << "</text>\n";
  }
  svg << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape_xml(x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << kMarginTop + plot_h / 2 << ")\">"
      << escape_xml(y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].ys.size(); ++i) {
      const double y = series[s].ys[i];
      if (!std::isfinite(y)) continue;
      svg << fmt(px(i)) << "," << fmt(py(y)) << " ";
    }
    svg << "\"/>\n";
    const double ly = kMarginTop + 14.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kMarginLeft + plot_w - 130 << "\" y1=\"" << fmt(ly + 8) << "\" x2=\""
        << kMarginLeft + plot_w - 110 << "\" y2=\"" << fmt(ly + 8) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kMarginLeft + plot_w - 104 << "\" y=\"" << fmt(ly + 12)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(series[s].label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_line_svg(const std::string& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_line_svg: cannot open " + path);
  out << render_line_svg(title, x_label, y_label, series);
  if (!out) throw std::runtime_error("write_line_svg: write failed for " + path);
}

}  // namespace pqlm
