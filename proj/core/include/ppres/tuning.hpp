#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ppres::tuning {

enum class SweepDirection { ramp_up, ramp_down };

struct FieldSweepRecord {
  double field = 0.0;                  // T, >= 0
  std::optional<double> angle;         // rad, in-plane
  double f_r = 0.0;                    // Hz
  std::optional<double> q_internal;
  SweepDirection direction = SweepDirection::ramp_up;
};

// f_r(B) = f_r0 * (1 - a B^2)
struct QuadraticTuneFit {
  double f_r0 = 0.0;      // Hz
  double a_coeff = 0.0;   // 1/T^2
  double residual_rms = 0.0;  // Hz
  std::vector<double> jump_fields;  // fields where a discrete jump was excluded
};

struct VortexEvent {
  double field = 0.0;    // T, first record of the new branch
  double delta_f = 0.0;  // Hz, size of the discrete step
  SweepDirection direction = SweepDirection::ramp_up;
};

// Indices i such that a discrete jump occurs between records i and i+1 of a
// field-sorted sweep. Jumps are steps in the quadratic-detrended residual
// larger than 5x the local scatter (1.4826 MAD of residual differences).
std::vector<std::size_t> detect_jumps(std::span<const FieldSweepRecord> sorted_records);

// Least squares for (f_r0, a). Records after each detected jump keep the
// shared curvature but get their own baseline offset, so vortex steps do not
// bias the coefficient. Throws Error("degenerate-data") with fewer than
// 3 distinct field magnitudes.
QuadraticTuneFit fit_quadratic_tuning(std::span<const FieldSweepRecord> records);

// f_r0 (1 - a B^2) - f_r0 = -f_r0 a B^2
double predict_detuning(const QuadraticTuneFit& fit, double field);

// Golden-section maximization of an angle -> f_r response over
// [angle_min, angle_max]; models in-plane alignment (field in plane when
// f_r is maximal). Evaluates the response at most
// ceil(log(window/tolerance)/log(1.618)) + 2 times and never outside the
// window. A post-hoc scan of the evaluation history throws
// Error("non-unimodal-bracket") when the samples are not single-peaked.
double alignment_search(const std::function<double(double)>& response, double angle_min,
                        double angle_max, double tolerance, int* evaluations = nullptr);

struct HysteresisReport {
  double max_delta_f = 0.0;            // Hz, max |up - down| over the common grid
  std::vector<VortexEvent> events;
};

// Compares up- and down-sweep branches on their common field range (linear
// interpolation onto the union grid) and flags discrete jumps per branch.
// Throws Error("non-overlapping-range") when the branches do not overlap.
HysteresisReport hysteresis_metric(std::span<const FieldSweepRecord> up,
                                   std::span<const FieldSweepRecord> down);

}  // namespace ppres::tuning
