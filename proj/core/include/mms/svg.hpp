#pragma once

#include <string>
#include <vector>

namespace mms {

/// One polyline in plot coordinates.
struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
};

struct SvgPlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width_px = 860;
  int height_px = 620;
  bool equal_aspect = false;  // for top-down path views
};

/// Writes a self-contained SVG line plot (axes, tick labels, legend).
/// Output is deterministic and locale-independent. Throws IoError.
void write_svg_plot(const std::string& path, const std::vector<SvgSeries>& series,
                    const SvgPlotOptions& options);

}  // namespace mms
