#pragma once

#include <string>
#include <vector>

namespace ppres::svg {

enum class AxisScale { linear, log10 };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  // empty -> palette by index
  bool dashed = false;
};

// Reference line of fixed log-log slope through (x0, y0); drawn only on
// log-log plots (regime guides).
struct GuideLine {
  double slope = 1.0;
  double x0 = 1.0;
  double y0 = 1.0;
  std::string label;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  AxisScale x_scale = AxisScale::linear;
  AxisScale y_scale = AxisScale::linear;
  std::vector<Series> series;
  std::vector<GuideLine> guides;
};

// Self-contained deterministic SVG (no timestamps, fixed formatting).
std::string render(const LinePlot& plot);

struct Heatmap {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string value_label;
  std::vector<double> xs;      // nx cell centers, ascending
  std::vector<double> ys;      // ny cell centers, ascending
  std::vector<double> values;  // ny * nx row-major; NaN cells are skipped
};

std::string render(const Heatmap& map);

}  // namespace ppres::svg
