#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ppres::protocols {

// Fluorescence photon-counting detection of a single spin.
struct PhotonCountingScenario {
  double t1 = 0.8e-3;        // s, spin excited-state lifetime
  double efficiency = 0.3;   // eta, in (0, 1]
  double dark_rate = 100.0;  // alpha, counts/s
  double snr_target = 2.0;

  void validate() const;
};

// SNR after integrating for tau_m, with one emitted photon per T1:
//   SNR = eta sqrt(tau_m / T1) / sqrt(2 T1 alpha + eta (1 - eta)).
// The noise combines the dark counts of the signal and reference windows
// with the binomial detection noise, which makes this the exact inverse of
// pc_integration_time. Returns +infinity when the noise term vanishes
// (eta = 1 with no dark counts).
double pc_snr(const PhotonCountingScenario& s, double tau_m);

// tau_m = (SNR/eta)^2 T1 (2 T1 alpha + eta (1 - eta))
double pc_integration_time(const PhotonCountingScenario& s);

enum class CountingRegime { shot_noise_limited, crossover, dark_count_limited };

// shot-noise-limited when 2 T1 alpha < eta(1-eta)/10, dark-count-limited
// when 2 T1 alpha > 10 eta(1-eta), crossover in between.
CountingRegime pc_regime(const PhotonCountingScenario& s);

std::string to_string(CountingRegime regime);

// Dispersive single-spin readout chain.
struct DispersiveScenario {
  double g0 = 30e3;          // Hz (as quoted g0/2pi)
  double kappa_c = 0.0;      // rad/s
  double kappa_i = 0.0;      // rad/s
  double efficiency = 0.3;   // measurement efficiency eta
  double gamma_nr = 1.0;     // 1/s, non-radiative decay
  double f_r = 7.5e9;        // Hz
  double n_crit_safety = 2.0;  // n_bar = n_crit / n_crit_safety

  double kappa() const { return kappa_c + kappa_i; }
  void validate() const;
};

// Critically coupled scenario with total quality factor q at f_r.
DispersiveScenario critically_coupled(double g0, double q_total, double f_r, double efficiency,
                                      double gamma_nr);

// 1/T1 = (4 (2 pi g0)^2 / kappa) (kappa/2)^2 / ((kappa/2)^2 + Delta^2) + gamma
double purcell_t1_detuned(const DispersiveScenario& s, double delta);

struct DispersivePair {
  double chi = 0.0;     // rad/s, dispersive shift
  double n_crit = 0.0;  // photons
  std::complex<double> s11_ground;
  std::complex<double> s11_excited;
};

// chi = (2 pi g0)^2 / Delta, n_crit = Delta^2 / (4 (2 pi g0)^2), and the
// bare-frequency reflection for the two spin states:
//   S11_g/e = (kappa_c - kappa_i +- 2i chi) / (kappa_c + kappa_i -+ 2i chi)
DispersivePair dispersive_pair(const DispersiveScenario& s, double delta);

struct SnrResult {
  double value = 0.0;
  bool steady_state_warning = false;  // tau_m < 10 / kappa
};

// SNR = sqrt(8 n_bar tau_m eta kappa_c / ((kappa/2)^2 + chi^2)) |chi|.
// When n_bar is omitted it defaults to n_crit / n_crit_safety, in which
// case the expression reduces to the detuning-independent
// 2 (2 pi g0 / kappa) sqrt(tau_m eta kappa_c) for chi << kappa/2.
SnrResult dispersive_snr(const DispersiveScenario& s, double delta, double tau_m,
                         std::optional<double> n_bar = {});

struct FidelityResult {
  double total = 0.0;               // F = P(e) * F_r
  double readout = 0.0;             // F_r = erf(SNR / 2)
  double excited_population = 0.0;  // P(e) = exp(-tau_m / T1)
  bool steady_state_warning = false;
};

FidelityResult total_fidelity(const DispersiveScenario& s, double delta, double tau_m);

struct ReadoutOptimum {
  double delta = 0.0;      // rad/s
  double tau_m = 0.0;      // s, fidelity-maximizing measurement time
  double fidelity = 0.0;
  double readout_fidelity = 0.0;
  double excited_population = 0.0;
  double n_bar = 0.0;
  double t1 = 0.0;         // s at this detuning
  double power_dbm = 0.0;  // emission-equivalent power at n_bar
  bool ok = false;
  std::string error;       // set when the per-point optimization failed
};

// Per-detuning fidelity optimum: golden-section search on log tau_m over
// [10/kappa, 100 T1(Delta)], relative tolerance 1e-3. A failed point gets an
// error entry; the rest of the grid is unaffected.
std::vector<ReadoutOptimum> optimize_readout(const DispersiveScenario& s,
                                             std::span<const double> delta_grid);

struct PowerCheck {
  double power_dbm = 0.0;  // -inf sentinel for n_bar = 0
  bool within_budget = true;
};

// Emission power of a resonator holding n_bar photons, against the first
// amplifier's saturation level (default -100 dBm).
PowerCheck twpa_power_check(double n_bar, double kappa, double f_r,
                            double saturation_dbm = -100.0);

struct McEstimate {
  double snr = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

// Monte Carlo oracle for photon counting: per trial, detected counts are a
// binomial thinning (probability eta) of the emitted photons (one per full
// T1 interval plus a Bernoulli for the fractional remainder) plus
// Poisson(alpha tau_m) dark counts; a paired background-only trial is
// subtracted. Empirical SNR = mean / std of the per-trial difference.
// Deterministic per seed.
McEstimate mc_photon_counting(const PhotonCountingScenario& s, double tau_m, std::size_t trials,
                              std::uint64_t seed);

// Monte Carlo oracle for dispersive readout: integrated quadrature records
// for ground/excited with means S11_{g/e} sqrt(2 Ndot_in tau_m eta) and unit
// per-quadrature noise; empirical SNR = separation of the two clouds over
// the pooled projected standard deviation.
McEstimate mc_dispersive(const DispersiveScenario& s, double delta, double tau_m,
                         std::size_t trials, std::uint64_t seed,
                         std::optional<double> n_bar = {});

}  // namespace ppres::protocols
