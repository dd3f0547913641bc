#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lsfem::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct Bounds {
  double xmin, xmax, ymin, ymax;
};

/// Tight bounds around all points with a 5% margin; a degenerate range is
/// widened to unit size.
Bounds data_bounds(const std::vector<Series>& series);

/// Scatter plot, one color per series, with a legend and axis ticks.
std::string scatter(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, std::optional<Bounds> bounds = std::nullopt);

/// Log-log line plot with markers. Non-positive values are skipped.
std::string loglog(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                   const std::string& ylabel);

}  // namespace lsfem::svg
