#include "ppres/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppres/error.hpp"

namespace ppres::numerics {

bool solve_linear(std::vector<double> a, std::vector<double>& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double v = std::fabs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0 || !std::isfinite(best)) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
      std::swap(b[pivot], b[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t ri = n; ri-- > 0;) {
    double sum = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) sum -= a[ri * n + c] * b[c];
    b[ri] = sum / a[ri * n + ri];
    if (!std::isfinite(b[ri])) return false;
  }
  return true;
}

std::vector<double> invert_matrix(std::vector<double> a, std::size_t n) {
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    if (!solve_linear(a, e, n)) return {};
    for (std::size_t r = 0; r < n; ++r) inv[r * n + col] = e[r];
  }
  return inv;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "domain-error", "fit_line needs >= 2 points");
  double xm = 0.0;
  for (double v : x) xm += v;
  xm /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - xm;
    sxx += dx * dx;
    sxy += dx * y[i];
    ym += y[i];
  }
  ym /= static_cast<double>(y.size());
  LinearFit fit;
  fit.x_ref = xm;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = ym;
  return fit;
}

LmResult levenberg_marquardt(const ResidualFn& fn, std::size_t n_residuals,
                             std::vector<double> initial, std::span<const double> step_clamp,
                             const LmOptions& options) {
  const std::size_t np = initial.size();
  LmResult out;
  out.params = std::move(initial);

  std::vector<double> r(n_residuals), rj(n_residuals);
  std::vector<double> jac(n_residuals * np), jac_next(n_residuals * np);

  auto eval = [&](std::span<const double> p, std::vector<double>& res, double* j) {
    fn(p, std::span<double>(res), j);
  };

  eval(out.params, r, jac.data());
  double cost = 0.0;
  for (double v : r) cost += v * v;

  double lambda = options.initial_lambda;
  std::vector<double> g(np), h(np * np), step(np), trial(np);

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    // normal equations
    std::fill(g.begin(), g.end(), 0.0);
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n_residuals; ++i) {
      const double* row = jac.data() + i * np;
      for (std::size_t a = 0; a < np; ++a) {
        g[a] += row[a] * r[i];
        for (std::size_t b = a; b < np; ++b) h[a * np + b] += row[a] * row[b];
      }
    }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < a; ++b) h[a * np + b] = h[b * np + a];

    bool moved = false;
    for (int tries = 0; tries < 30 && !moved; ++tries) {
      std::vector<double> damped = h;
      for (std::size_t a = 0; a < np; ++a) {
        const double diag = std::max(h[a * np + a], 1e-300);
        damped[a * np + a] = diag * (1.0 + lambda);
      }
      step = g;
      for (double& v : step) v = -v;
      if (!solve_linear(damped, step, np)) {
        lambda *= 10.0;
        continue;
      }
      if (!step_clamp.empty()) {
        for (std::size_t a = 0; a < np; ++a) step[a] = std::clamp(step[a], -step_clamp[a], step_clamp[a]);
      }
      for (std::size_t a = 0; a < np; ++a) trial[a] = out.params[a] + step[a];
      eval(trial, rj, jac_next.data());
      double cost_trial = 0.0;
      for (double v : rj) cost_trial += v * v;
      if (std::isfinite(cost_trial) && cost_trial < cost) {
        out.params = trial;
        r.swap(rj);
        jac.swap(jac_next);
        cost = cost_trial;
        lambda = std::max(lambda * 0.3, 1e-14);
        moved = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!moved) break;

    double rel = 0.0;
    for (std::size_t a = 0; a < np; ++a) {
      rel = std::max(rel, std::fabs(step[a]) / std::max(std::fabs(out.params[a]), 1.0));
    }
    if (rel < options.step_tolerance) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;
  if (!out.converged) {
    // stalled (no downhill step found) counts as converged at a minimum
    out.converged = it < options.max_iterations;
  }
  out.cost = cost;

  // Gauss-Newton covariance at the solution
  std::fill(h.begin(), h.end(), 0.0);
  for (std::size_t i = 0; i < n_residuals; ++i) {
    const double* row = jac.data() + i * np;
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = a; b < np; ++b) h[a * np + b] += row[a] * row[b];
  }
  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < a; ++b) h[a * np + b] = h[b * np + a];
  out.covariance = invert_matrix(h, np);
  return out;
}

double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tol, int* evaluations) {
  require(hi > lo, "domain-error", "golden_section_maximize needs hi > lo");
  require(tol > 0.0, "domain-error", "golden_section_maximize needs tol > 0");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;  // 0.618...
  int evals = 0;
  auto eval = [&](double x) {
    ++evals;
    return f(x);
  };
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    }
  }
  if (evaluations != nullptr) *evaluations = evals;
  return 0.5 * (a + b);
}

double median(std::vector<double> values) {
  require(!values.empty(), "domain-error", "median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                   values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (values[mid - 1] + hi);
}

double mad_sigma(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  const double med = median(v);
  for (double& x : v) x = std::fabs(x - med);
  return 1.4826 * median(std::move(v));
}

}  // namespace ppres::numerics
