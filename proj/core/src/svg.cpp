#include "ppres/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ppres/error.hpp"

namespace ppres::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 72.0, kRight = 24.0, kTop = 40.0, kBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct AxisRange {
  double lo = 0.0, hi = 1.0;
  AxisScale scale = AxisScale::linear;

  double map(double v, double pix_lo, double pix_hi) const {
    double a = lo, b = hi, x = v;
    if (scale == AxisScale::log10) {
      a = std::log10(lo);
      b = std::log10(hi);
      x = std::log10(v);
    }
    if (b == a) return 0.5 * (pix_lo + pix_hi);
    return pix_lo + (x - a) / (b - a) * (pix_hi - pix_lo);
  }

  bool valid(double v) const {
    if (!std::isfinite(v)) return false;
    if (scale == AxisScale::log10 && v <= 0.0) return false;
    return true;
  }
};

std::vector<double> linear_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const double span = hi - lo;
  if (span <= 0.0) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-9 * span; t += step) ticks.push_back(t == 0.0 ? 0.0 : t);
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  int e0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-12));
  int e1 = static_cast<int>(std::floor(std::log10(hi) + 1e-12));
  for (int e = e0; e <= e1; ++e) ticks.push_back(std::pow(10.0, e));
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

void expand(double v, double& lo, double& hi) {
  lo = std::min(lo, v);
  hi = std::max(hi, v);
}

// shared viridis-like ramp, 5 anchors
void colormap(double t, int& r, int& g, int& b) {
  static const double anchors[5][3] = {{0.267, 0.005, 0.329},
                                       {0.229, 0.322, 0.546},
                                       {0.127, 0.566, 0.551},
                                       {0.369, 0.789, 0.383},
                                       {0.993, 0.906, 0.144}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(static_cast<int>(t), 3);
  const double f = t - i;
  r = static_cast<int>(std::lround(255.0 * (anchors[i][0] + f * (anchors[i + 1][0] - anchors[i][0]))));
  g = static_cast<int>(std::lround(255.0 * (anchors[i][1] + f * (anchors[i + 1][1] - anchors[i][1]))));
  b = static_cast<int>(std::lround(255.0 * (anchors[i][2] + f * (anchors[i + 1][2] - anchors[i][2]))));
}

std::string header() {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\" font-family=\"sans-serif\">\n"
         "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
}

void draw_frame_and_labels(std::string& out, const std::string& title, const std::string& x_label,
                           const std::string& y_label) {
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
         num(kWidth - kLeft - kRight) + "\" height=\"" + num(kHeight - kTop - kBottom) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 14) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + escape(x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + num(kHeight / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
         num(kHeight / 2) + ")\">" + escape(y_label) + "</text>\n";
}

}  // namespace

std::string render(const LinePlot& plot) {
  require(!plot.series.empty(), "missing-series", "plot has no series");

  AxisRange xr{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
               plot.x_scale};
  AxisRange yr{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
               plot.y_scale};
  std::size_t points = 0;
  for (const auto& s : plot.series) {
    require(s.x.size() == s.y.size(), "domain-error", "series x/y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!xr.valid(s.x[i]) || !yr.valid(s.y[i])) continue;
      expand(s.x[i], xr.lo, xr.hi);
      expand(s.y[i], yr.lo, yr.hi);
      ++points;
    }
  }
  require(points > 0, "missing-series", "plot series hold no drawable points");
  if (xr.lo == xr.hi) {
    xr.lo = xr.lo - (xr.scale == AxisScale::log10 ? 0.5 * xr.lo : std::max(1.0, std::fabs(xr.lo)));
    xr.hi = xr.hi + (xr.scale == AxisScale::log10 ? 0.5 * xr.hi : std::max(1.0, std::fabs(xr.hi)));
  }
  if (yr.lo == yr.hi) {
    yr.lo = yr.lo - (yr.scale == AxisScale::log10 ? 0.5 * yr.lo : std::max(1.0, std::fabs(yr.lo)));
    yr.hi = yr.hi + (yr.scale == AxisScale::log10 ? 0.5 * yr.hi : std::max(1.0, std::fabs(yr.hi)));
  }

  const double px0 = kLeft, px1 = kWidth - kRight;
  const double py0 = kHeight - kBottom, py1 = kTop;  // y grows upward

  std::string out = header();
  draw_frame_and_labels(out, plot.title, plot.x_label, plot.y_label);

  auto ticks_for = [](const AxisRange& r) {
    return r.scale == AxisScale::log10 ? log_ticks(r.lo, r.hi) : linear_ticks(r.lo, r.hi);
  };
  for (double t : ticks_for(xr)) {
    const double px = xr.map(t, px0, px1);
    out += "<line x1=\"" + num(px) + "\" y1=\"" + num(py0) + "\" x2=\"" + num(px) + "\" y2=\"" +
           num(py0 + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(px) + "\" y=\"" + num(py0 + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + num(t) + "</text>\n";
  }
  for (double t : ticks_for(yr)) {
    const double py = yr.map(t, py0, py1);
    out += "<line x1=\"" + num(px0 - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(px0) +
           "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(px0 - 8) + "\" y=\"" + num(py + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + num(t) + "</text>\n";
  }

  for (const auto& guide : plot.guides) {
    if (plot.x_scale != AxisScale::log10 || plot.y_scale != AxisScale::log10) break;
    // y = y0 * (x/x0)^slope, clipped to the axis box in log space
    const double lx0 = std::log10(xr.lo), lx1 = std::log10(xr.hi);
    auto y_at = [&](double lx) {
      return std::log10(guide.y0) + guide.slope * (lx - std::log10(guide.x0));
    };
    const double gy0 = y_at(lx0), gy1 = y_at(lx1);
    const double X0 = xr.map(std::pow(10.0, lx0), px0, px1);
    const double X1 = xr.map(std::pow(10.0, lx1), px0, px1);
    const double Y0 = yr.map(std::pow(10.0, gy0), py0, py1);
    const double Y1 = yr.map(std::pow(10.0, gy1), py0, py1);
    out += "<line x1=\"" + num(X0) + "\" y1=\"" + num(Y0) + "\" x2=\"" + num(X1) + "\" y2=\"" +
           num(Y1) + "\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n";
    if (!guide.label.empty()) {
      out += "<text x=\"" + num(X1 - 4) + "\" y=\"" + num(Y1 - 6) +
             "\" text-anchor=\"end\" font-size=\"11\" fill=\"#666666\">" + escape(guide.label) +
             "</text>\n";
    }
  }

  std::size_t color_index = 0;
  double legend_y = kTop + 16.0;
  for (const auto& s : plot.series) {
    std::string color = s.color.empty()
                            ? kPalette[color_index % (sizeof(kPalette) / sizeof(kPalette[0]))]
                            : s.color;
    ++color_index;
    std::string path;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!xr.valid(s.x[i]) || !yr.valid(s.y[i])) {
        pen_down = false;
        continue;
      }
      const double px = xr.map(s.x[i], px0, px1);
      const double py = yr.map(s.y[i], py0, py1);
      path += (pen_down ? "L" : "M") + num(px) + " " + num(py);
      pen_down = true;
    }
    if (path.empty()) continue;  // optional series with no data: omitted
    out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\"" +
           (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + " stroke-width=\"1.5\"/>\n";
    if (!s.label.empty()) {
      out += "<line x1=\"" + num(px1 - 130) + "\" y1=\"" + num(legend_y - 4) + "\" x2=\"" +
             num(px1 - 110) + "\" y2=\"" + num(legend_y - 4) + "\" stroke=\"" + color + "\"" +
             (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
      out += "<text x=\"" + num(px1 - 104) + "\" y=\"" + num(legend_y) + "\" font-size=\"11\">" +
             escape(s.label) + "</text>\n";
      legend_y += 16.0;
    }
  }
  out += "</svg>\n";
  return out;
}

std::string render(const Heatmap& map) {
  require(!map.xs.empty() && !map.ys.empty(), "missing-series", "heatmap has no grid");
  require(map.values.size() == map.xs.size() * map.ys.size(), "domain-error",
          "heatmap value count does not match the grid");

  double v_lo = std::numeric_limits<double>::infinity();
  double v_hi = -std::numeric_limits<double>::infinity();
  for (double v : map.values) {
    if (std::isfinite(v)) expand(v, v_lo, v_hi);
  }
  require(v_hi >= v_lo, "missing-series", "heatmap holds no finite values");
  if (v_hi == v_lo) v_hi = v_lo + 1.0;

  const double px0 = kLeft, px1 = kWidth - kRight - 60.0;  // leave room for the color bar
  const double py0 = kHeight - kBottom, py1 = kTop;
  const std::size_t nx = map.xs.size(), ny = map.ys.size();
  const double cw = (px1 - px0) / static_cast<double>(nx);
  const double ch = (py0 - py1) / static_cast<double>(ny);

  std::string out = header();
  draw_frame_and_labels(out, map.title, map.x_label, map.y_label);

  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double v = map.values[j * nx + i];
      if (!std::isfinite(v)) continue;
      int r, g, b;
      colormap((v - v_lo) / (v_hi - v_lo), r, g, b);
      char color[10];
      std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
      const double x = px0 + static_cast<double>(i) * cw;
      const double y = py0 - static_cast<double>(j + 1) * ch;
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cw + 0.5) +
             "\" height=\"" + num(ch + 0.5) + "\" fill=\"" + std::string(color) + "\"/>\n";
    }
  }

  // axis extents
  out += "<text x=\"" + num(px0) + "\" y=\"" + num(py0 + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + num(map.xs.front()) + "</text>\n";
  out += "<text x=\"" + num(px1) + "\" y=\"" + num(py0 + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + num(map.xs.back()) + "</text>\n";
  out += "<text x=\"" + num(px0 - 8) + "\" y=\"" + num(py0 + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + num(map.ys.front()) + "</text>\n";
  out += "<text x=\"" + num(px0 - 8) + "\" y=\"" + num(py1 + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + num(map.ys.back()) + "</text>\n";

  // color bar
  const double bar_x = kWidth - kRight - 44.0;
  const int steps = 32;
  const double bar_h = (py0 - py1) / steps;
  for (int k = 0; k < steps; ++k) {
    int r, g, b;
    colormap((k + 0.5) / steps, r, g, b);
    char color[10];
    std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
    const double y = py0 - (k + 1) * bar_h;
    out += "<rect x=\"" + num(bar_x) + "\" y=\"" + num(y) + "\" width=\"16\" height=\"" +
           num(bar_h + 0.5) + "\" fill=\"" + std::string(color) + "\"/>\n";
  }
  out += "<text x=\"" + num(bar_x + 20) + "\" y=\"" + num(py0) + "\" font-size=\"11\">" +
         num(v_lo) + "</text>\n";
  out += "<text x=\"" + num(bar_x + 20) + "\" y=\"" + num(py1 + 10) + "\" font-size=\"11\">" +
         num(v_hi) + "</text>\n";
  out += "<text x=\"" + num(bar_x + 8) + "\" y=\"" + num(py1 - 6) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + escape(map.value_label) + "</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace ppres::svg
