#pragma once

#include <string>
#include <vector>

namespace pqlm {

// Minimal deterministic SVG line charts for loss curves and ablation
// figures; x is the sample index.
struct PlotSeries {
  std::string label;
  std::vector<double> ys;
};

std::string render_line_svg(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<PlotSeries>& series);

void write_line_svg(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

}  // namespace pqlm
