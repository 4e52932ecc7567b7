#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ppres::spectroscopy {

// Frequency-indexed single-port reflection data.
struct ComplexTrace {
  std::vector<double> frequency;           // Hz, strictly increasing
  std::vector<std::complex<double>> s11;
  std::optional<double> power_dbm;         // at the sample, if known

  void validate() const;  // >= 16 points, matching lengths, monotone
};

// Instrument background: S11_measured = a * exp(i(phi0 + 2 pi tau f)) * S11.
struct DeembedParams {
  double amplitude = 1.0;
  double phase_offset = 0.0;     // rad
  double electrical_delay = 0.0; // s
  std::optional<double> amplitude_slope;  // 1/Hz, unused by default
};

struct ResonanceFit {
  double f_r = 0.0;
  double q_internal = 0.0;
  double q_coupling = 0.0;
  double residual_rms = 0.0;
  struct {
    double f_r = 0.0;
    double q_internal = 0.0;
    double q_coupling = 0.0;
  } standard_error;
  int iterations = 0;

  double kappa_i() const;
  double kappa_c() const;
  double kappa() const;
};

// Reflection off a single-port resonator probed at f:
//   S11 = (kappa_c - kappa_i + 2i dw) / (kappa_c + kappa_i + 2i dw),
// dw = 2 pi (f - f_r). On resonance S11 = (kappa_c - kappa_i)/kappa; far off
// resonance S11 -> 1. |S11| <= 1 for all real detunings.
std::complex<double> model_s11(double f, double f_r, double kappa_c, double kappa_i);

struct SynthParams {
  double f_r = 7.5e9;
  double q_internal = 2e4;
  double q_coupling = 1e4;
  std::size_t n_points = 401;
  double span_linewidths = 10.0;  // total span in units of kappa/2pi
};

// Synthetic measured trace: background applied to the model, plus complex
// Gaussian noise of the given per-quadrature sigma. Deterministic per seed.
ComplexTrace synthesize_trace(const SynthParams& params, const DeembedParams& background,
                              double noise_sigma, std::uint64_t seed);

// Algebraic (Kasa) circle fit of a complex locus.
struct CircleFit {
  double center_x = 0.0, center_y = 0.0, radius = 0.0;
  double rms = 0.0;  // radial residual
};
CircleFit fit_circle(std::span<const std::complex<double>> points);

// Remove cable delay, attenuation and phase offset. Returns the corrected
// trace together with the background estimate. Seeds from the off-resonant
// outer 20% of points, then refines with a joint background x resonance
// least-squares fit. Throws Error("insufficient-span") when the detected
// resonance is wider than a fifth of the span.
std::pair<ComplexTrace, DeembedParams> deembed(const ComplexTrace& trace);

struct FitGuess {
  double f_r = 0.0;
  double q_internal = 0.0;
  double q_coupling = 0.0;
};

// Complex-plane least-squares fit of model_s11 to a de-embedded trace.
// Without a guess, seeds from the circle fit plus the point of fastest
// S11 motion. Throws Error("fit-failed") on non-convergence and
// Error("rejected-fit") when a fitted Q leaves [1, 1e9].
ResonanceFit fit_resonance(const ComplexTrace& trace, std::optional<FitGuess> guess = {});

// Power-dependent internal loss from two-level systems:
//   1/Q_i(n) = tan_delta0_eff * tanh(hbar w / 2 k T) / (1 + n/n_c)^(beta/2) + 1/q_other
struct TlsParams {
  double tan_delta0_eff = 1e-5;
  double n_c = 1.0;
  double beta = 1.0;
  double q_other = 1e6;
  double temperature = 0.02;  // K

  void validate() const;
};

std::vector<double> qi_vs_photon_number(const TlsParams& params, double f_r,
                                        std::span<const double> n_bar);

// Recover (tan_delta0_eff, n_c, q_other) from a Q_i(n) curve; beta and
// temperature are held fixed.
TlsParams fit_tls(std::span<const double> n_bar, std::span<const double> q_internal, double f_r,
                  double temperature = 0.02, double beta = 1.0);

// Steady-state intra-resonator photon number for an incident power P (W):
//   n = (P / h f_r) * kappa_c / ((kappa/2)^2 + detuning^2)
double photon_number_from_power(double p_in, double f_r, double kappa_c, double kappa,
                                double probe_detuning);

}  // namespace ppres::spectroscopy
