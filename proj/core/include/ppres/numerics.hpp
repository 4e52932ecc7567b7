#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ppres::numerics {

// Dense row-major linear solve (Gaussian elimination, partial pivoting).
// Returns false when the matrix is numerically singular. a is n*n, b is n.
bool solve_linear(std::vector<double> a, std::vector<double>& b, std::size_t n);

// Inverse of a dense row-major n*n matrix; empty vector when singular.
std::vector<double> invert_matrix(std::vector<double> a, std::size_t n);

struct LinearFit {
  double intercept = 0.0;  // value at x = x_ref
  double slope = 0.0;
  double x_ref = 0.0;
};

// Ordinary least squares line through (x, y), parameterized around mean(x).
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Residual callback: fill `residuals` (size fixed at construction) and,
// when `jacobian` is non-null, the row-major n_residuals x n_params Jacobian.
using ResidualFn =
    std::function<void(std::span<const double> params, std::span<double> residuals, double* jacobian)>;

struct LmOptions {
  int max_iterations = 200;
  double initial_lambda = 1e-3;
  double step_tolerance = 1e-14;  // relative step size convergence
};

struct LmResult {
  std::vector<double> params;
  std::vector<double> covariance;  // (J^T J)^-1, row-major; scale by residual variance
  double cost = 0.0;               // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

// Damped least squares with Marquardt diagonal scaling. `step_clamp`
// (optional, per-parameter) limits each accepted step; useful with
// log-parameterizations. The callback may be called with jacobian == nullptr
// for pure cost evaluations.
LmResult levenberg_marquardt(const ResidualFn& fn, std::size_t n_residuals,
                             std::vector<double> initial,
                             std::span<const double> step_clamp = {},
                             const LmOptions& options = {});

// Golden-section scalar maximization on [lo, hi]. Stops once the bracket is
// narrower than `tol`; total function evaluations are
// ceil(log((hi-lo)/tol)/log(phi)) + 2 at most. `evaluations`, when given,
// receives the exact count.
double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tol, int* evaluations = nullptr);

// Median and median-absolute-deviation based scatter (1.4826 * MAD).
double median(std::vector<double> values);
double mad_sigma(std::span<const double> values);

}  // namespace ppres::numerics
