#include "ppres/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ppres/error.hpp"
#include "ppres/numerics.hpp"

namespace ppres::tuning {

namespace {

std::vector<FieldSweepRecord> sorted_by_field(std::span<const FieldSweepRecord> records) {
  std::vector<FieldSweepRecord> out(records.begin(), records.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const FieldSweepRecord& a, const FieldSweepRecord& b) { return a.field < b.field; });
  return out;
}

void check_records(std::span<const FieldSweepRecord> records) {
  for (const auto& r : records) {
    require(r.field >= 0.0, "domain-error", "field magnitude must be >= 0");
    require(r.f_r > 0.0, "domain-error", "resonance frequency must be positive");
  }
}

std::size_t distinct_fields(std::span<const FieldSweepRecord> sorted) {
  std::size_t n = sorted.empty() ? 0 : 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].field != sorted[i - 1].field) ++n;
  }
  return n;
}

// Plain (f_r0, slope) least squares of f = c0 - c1 B^2; used for detrending.
bool quad_trend(std::span<const FieldSweepRecord> recs, double& c0, double& c1) {
  double s0 = 0, s1 = 0, s2 = 0, sy = 0, sxy = 0;
  for (const auto& r : recs) {
    const double x = r.field * r.field;
    s0 += 1.0;
    s1 += x;
    s2 += x * x;
    sy += r.f_r;
    sxy += x * r.f_r;
  }
  const double det = s0 * s2 - s1 * s1;
  if (det == 0.0) {
    c0 = sy / s0;
    c1 = 0.0;
    return false;
  }
  c0 = (s2 * sy - s1 * sxy) / det;
  c1 = -(s0 * sxy - s1 * sy) / det;  // f = c0 - c1 x
  return true;
}

// Linear interpolation of f_r at field b on a sorted sweep.
double interp_f(std::span<const FieldSweepRecord> sorted, double b) {
  if (b <= sorted.front().field) return sorted.front().f_r;
  if (b >= sorted.back().field) return sorted.back().f_r;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].field >= b) {
      const double b0 = sorted[i - 1].field, b1 = sorted[i].field;
      if (b1 == b0) return sorted[i].f_r;
      const double t = (b - b0) / (b1 - b0);
      return sorted[i - 1].f_r + t * (sorted[i].f_r - sorted[i - 1].f_r);
    }
  }
  return sorted.back().f_r;
}

}  // namespace

std::vector<std::size_t> detect_jumps(std::span<const FieldSweepRecord> sorted_records) {
  std::vector<std::size_t> jumps;
  const std::size_t n = sorted_records.size();
  if (n < 4) return jumps;

  double c0 = 0.0, c1 = 0.0;
  quad_trend(sorted_records, c0, c1);
  std::vector<double> resid(n), diff(n - 1);
  double f_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sorted_records[i].field * sorted_records[i].field;
    resid[i] = sorted_records[i].f_r - (c0 - c1 * x);
    f_scale += std::fabs(sorted_records[i].f_r);
  }
  f_scale /= static_cast<double>(n);
  for (std::size_t i = 0; i + 1 < n; ++i) diff[i] = resid[i + 1] - resid[i];

  const double sigma = numerics::mad_sigma(diff);
  const double threshold = std::max(5.0 * sigma, 1e-9 * f_scale);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::fabs(diff[i]) > threshold) jumps.push_back(i);
  }
  return jumps;
}

QuadraticTuneFit fit_quadratic_tuning(std::span<const FieldSweepRecord> records) {
  check_records(records);
  std::vector<FieldSweepRecord> sorted = sorted_by_field(records);
  require(distinct_fields(sorted) >= 3, "degenerate-data",
          "quadratic tuning fit needs >= 3 distinct field magnitudes");

  const std::vector<std::size_t> jumps = detect_jumps(sorted);
  const std::size_t n = sorted.size();
  const std::size_t n_seg = jumps.size() + 1;

  // segments split at jumps; shared (f_r0, slope), per-segment offsets
  std::vector<std::size_t> segment(n, 0);
  {
    std::size_t seg = 0, k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      segment[i] = seg;
      if (k < jumps.size() && i == jumps[k]) {
        ++seg;
        ++k;
      }
    }
  }

  const std::size_t np = 2 + (n_seg - 1);
  std::vector<double> ata(np * np, 0.0), atb(np, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(np, 0.0);
    row[0] = 1.0;
    row[1] = -sorted[i].field * sorted[i].field;
    if (segment[i] > 0) row[1 + segment[i]] = 1.0;
    for (std::size_t a = 0; a < np; ++a) {
      atb[a] += row[a] * sorted[i].f_r;
      for (std::size_t b = 0; b < np; ++b) ata[a * np + b] += row[a] * row[b];
    }
  }
  require(numerics::solve_linear(std::move(ata), atb, np), "degenerate-data",
          "singular quadratic tuning fit");

  QuadraticTuneFit fit;
  fit.f_r0 = atb[0];
  require(fit.f_r0 > 0.0, "degenerate-data", "fit produced non-positive f_r0");
  fit.a_coeff = atb[1] / fit.f_r0;
  if (std::fabs(fit.a_coeff) < 1e-9) fit.a_coeff = 0.0;  // flat data, rounding floor
  for (std::size_t j : jumps) fit.jump_fields.push_back(sorted[j + 1].field);

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double model = fit.f_r0 - atb[1] * sorted[i].field * sorted[i].field;
    if (segment[i] > 0) model += atb[1 + segment[i]];
    const double r = sorted[i].f_r - model;
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

double predict_detuning(const QuadraticTuneFit& fit, double field) {
  require(field >= 0.0, "domain-error", "field must be >= 0");
  return -fit.f_r0 * fit.a_coeff * field * field;
}

double alignment_search(const std::function<double(double)>& response, double angle_min,
                        double angle_max, double tolerance, int* evaluations) {
  require(angle_max > angle_min, "domain-error", "empty angle window");
  require(tolerance > 0.0, "domain-error", "tolerance must be positive");

  std::vector<std::pair<double, double>> history;
  auto wrapped = [&](double angle) {
    require(angle >= angle_min && angle <= angle_max, "domain-error",
            "evaluation outside the angle window");
    const double v = response(angle);
    history.emplace_back(angle, v);
    return v;
  };
  int evals = 0;
  const double best =
      numerics::golden_section_maximize(wrapped, angle_min, angle_max, tolerance, &evals);
  if (evaluations != nullptr) *evaluations = evals;

  // Post-hoc unimodality check on the evaluation history: sorted by angle,
  // values must rise to a single peak and then fall (tolerance for plateaus
  // and rounding).
  std::sort(history.begin(), history.end());
  double lo = history.front().second, hi = lo;
  for (const auto& [a, v] : history) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double wiggle = 1e-9 * std::max(hi - lo, std::fabs(hi));
  std::size_t peak = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].second > history[peak].second) peak = i;
  }
  for (std::size_t i = 1; i <= peak; ++i) {
    require(history[i].second >= history[i - 1].second - wiggle, "non-unimodal-bracket",
            "response is not unimodal within the window");
  }
  for (std::size_t i = peak + 1; i < history.size(); ++i) {
    require(history[i].second <= history[i - 1].second + wiggle, "non-unimodal-bracket",
            "response is not unimodal within the window");
  }
  return best;
}

HysteresisReport hysteresis_metric(std::span<const FieldSweepRecord> up,
                                   std::span<const FieldSweepRecord> down) {
  check_records(up);
  check_records(down);
  require(up.size() >= 2 && down.size() >= 2, "domain-error",
          "hysteresis needs >= 2 records per branch");
  std::vector<FieldSweepRecord> u = sorted_by_field(up);
  std::vector<FieldSweepRecord> d = sorted_by_field(down);

  const double lo = std::max(u.front().field, d.front().field);
  const double hi = std::min(u.back().field, d.back().field);
  require(lo <= hi, "non-overlapping-range", "up and down sweeps share no field range");

  std::set<double> grid;
  for (const auto& r : u) {
    if (r.field >= lo && r.field <= hi) grid.insert(r.field);
  }
  for (const auto& r : d) {
    if (r.field >= lo && r.field <= hi) grid.insert(r.field);
  }

  HysteresisReport report;
  for (double b : grid) {
    report.max_delta_f = std::max(report.max_delta_f, std::fabs(interp_f(u, b) - interp_f(d, b)));
  }

  auto collect = [&report](std::span<const FieldSweepRecord> sorted, SweepDirection dir) {
    double c0 = 0.0, c1 = 0.0;
    quad_trend(sorted, c0, c1);
    for (std::size_t i : detect_jumps(sorted)) {
      const double x0 = sorted[i].field * sorted[i].field;
      const double x1 = sorted[i + 1].field * sorted[i + 1].field;
      const double step = (sorted[i + 1].f_r - (c0 - c1 * x1)) - (sorted[i].f_r - (c0 - c1 * x0));
      report.events.push_back({sorted[i + 1].field, step, dir});
    }
  };
  collect(u, SweepDirection::ramp_up);
  collect(d, SweepDirection::ramp_down);
  return report;
}

}  // namespace ppres::tuning
