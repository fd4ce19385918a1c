#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace alignlab {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = true;
};

struct LinePlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Axis range actually drawn (data range padded; decades on log axes).
struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};
/// Ranges covering all plottable points; nonpositive values are skipped on log axes.
std::pair<AxisRange, AxisRange> plot_ranges(const LinePlot& plot);

/// Standalone SVG 1.1 document.
std::string render_svg(const LinePlot& plot, int width = 640, int height = 420);
void write_svg(const std::filesystem::path& path, const LinePlot& plot);

}  // namespace alignlab
