#pragma once

// Self-contained SVG line charts of one CSV column against another.

#include <string>
#include <utility>
#include <vector>

namespace sparselab {

struct PlotSeries {
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;  // in file order
};

/// Reads columns `x` and `y` (by header name) from CSV text. Rows whose
/// fields are not numeric are skipped; a missing column is a ParseError.
PlotSeries read_plot_series(const std::string& csv, const std::string& x, const std::string& y);

/// One polyline through the points in order, plus a marker per point.
/// Larger y is drawn higher. Empty data is a DomainError.
std::string emit_plot(const PlotSeries& s, int width = 640, int height = 400);

}  // namespace sparselab
