#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "ppres/constants.hpp"
#include "ppres/error.hpp"
#include "ppres/spectroscopy.hpp"

using namespace ppres;
using complexd = std::complex<double>;

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

spectroscopy::SynthParams reference_params() {
  spectroscopy::SynthParams p;
  p.f_r = 7.5e9;
  p.q_internal = 2e4;
  p.q_coupling = 1e4;
  return p;
}

spectroscopy::DeembedParams reference_background() {
  spectroscopy::DeembedParams b;
  b.amplitude = 0.8;
  b.phase_offset = 1.0;
  b.electrical_delay = 50e-9;
  return b;
}

// Steady state of the driven cavity amplitude by explicit time integration
// (RK4); independent route to the photon number formula.
double steady_state_photons(double photon_rate_in, double kappa_c, double kappa, double detuning) {
  complexd a(0.0, 0.0);
  const complexd drive(std::sqrt(kappa_c * photon_rate_in), 0.0);
  const complexd pole(-0.5 * kappa, -detuning);
  auto rhs = [&](complexd v) { return pole * v + drive; };
  const double dt = 0.02 / kappa;
  const int steps = static_cast<int>(40.0 / (kappa * dt));
  for (int i = 0; i < steps; ++i) {
    const complexd k1 = rhs(a);
    const complexd k2 = rhs(a + 0.5 * dt * k1);
    const complexd k3 = rhs(a + 0.5 * dt * k2);
    const complexd k4 = rhs(a + dt * k3);
    a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return std::norm(a);
}

}  // namespace

TEST_CASE("reflection model: limits and fixed points") {
  const double f_r = 7.5e9;
  const double ki = kTwoPi * f_r / 2e4;

  // matched on resonance
  CHECK(std::abs(spectroscopy::model_s11(f_r, f_r, ki, ki)) < 1e-15);

  // off-resonant asymptote -> +1
  const complexd far = spectroscopy::model_s11(f_r + 1e9, f_r, ki, ki);
  CHECK(far.real() == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(far) == doctest::Approx(1.0).epsilon(1e-6));

  // kappa_c = 2 kappa_i on resonance
  CHECK(spectroscopy::model_s11(f_r, f_r, 2.0 * ki, ki).real() ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(spectroscopy::model_s11(f_r, f_r, -1.0, ki), Error);
}

TEST_CASE("reflection magnitude never exceeds unity") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> log_q(std::log(1e2), std::log(1e7));
  std::uniform_real_distribution<double> detune(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double f_r = 5e9;
    const double kc = kTwoPi * f_r / std::exp(log_q(rng));
    const double ki = kTwoPi * f_r / std::exp(log_q(rng));
    const double f = f_r + detune(rng) * (kc + ki) / kTwoPi;
    CHECK(std::abs(spectroscopy::model_s11(f, f_r, kc, ki)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("reflection locus is a circle") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> log_q(std::log(5e2), std::log(1e6));
  for (int i = 0; i < 1000; ++i) {
    const double f_r = 6e9;
    const double kc = kTwoPi * f_r / std::exp(log_q(rng));
    const double ki = kTwoPi * f_r / std::exp(log_q(rng));
    std::vector<complexd> pts;
    for (int k = 0; k < 64; ++k) {
      const double f = f_r + (k - 32) * (kc + ki) / kTwoPi / 8.0;
      pts.push_back(spectroscopy::model_s11(f, f_r, kc, ki));
    }
    const spectroscopy::CircleFit fit = spectroscopy::fit_circle(pts);
    CHECK(fit.rms < 1e-9);
    // radius kappa_i / kappa, center on the real axis
    CHECK(fit.radius == doctest::Approx(ki / (kc + ki)).epsilon(1e-6));
    CHECK(std::fabs(fit.center_y) < 1e-9);
  }
}

TEST_CASE("trace synthesis") {
  const spectroscopy::SynthParams params = reference_params();

  // no background, no noise: equals the model exactly
  const spectroscopy::ComplexTrace clean =
      spectroscopy::synthesize_trace(params, {}, 0.0, 1);
  clean.validate();
  const double w_r = kTwoPi * params.f_r;
  for (std::size_t i = 0; i < clean.frequency.size(); i += 40) {
    const complexd m = spectroscopy::model_s11(clean.frequency[i], params.f_r,
                                               w_r / params.q_coupling, w_r / params.q_internal);
    CHECK(std::abs(clean.s11[i] - m) < 1e-15);
  }

  // determinism per seed
  const spectroscopy::ComplexTrace a =
      spectroscopy::synthesize_trace(params, reference_background(), 0.01, 42);
  const spectroscopy::ComplexTrace b =
      spectroscopy::synthesize_trace(params, reference_background(), 0.01, 42);
  const spectroscopy::ComplexTrace c =
      spectroscopy::synthesize_trace(params, reference_background(), 0.01, 43);
  bool same = true, different = false;
  for (std::size_t i = 0; i < a.s11.size(); ++i) {
    same = same && a.s11[i] == b.s11[i];
    different = different || a.s11[i] != c.s11[i];
  }
  CHECK(same);
  CHECK(different);
}

TEST_CASE("noiseless de-embedding round trip") {
  const spectroscopy::ComplexTrace raw =
      spectroscopy::synthesize_trace(reference_params(), reference_background(), 0.0, 1);
  auto [corrected, bg] = spectroscopy::deembed(raw);

  CHECK(bg.amplitude == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(bg.phase_offset == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(bg.electrical_delay == doctest::Approx(50e-9).epsilon(1e-8));

  // corrected trace sits on the bare model
  const double w_r = kTwoPi * 7.5e9;
  for (std::size_t i = 0; i < corrected.frequency.size(); i += 50) {
    const complexd m =
        spectroscopy::model_s11(corrected.frequency[i], 7.5e9, w_r / 1e4, w_r / 2e4);
    CHECK(std::abs(corrected.s11[i] - m) < 1e-8);
  }
}

TEST_CASE("de-embedding identity and baseline-only cases") {
  // identity background: parameters come back as (1, 0, 0)
  const spectroscopy::ComplexTrace plain =
      spectroscopy::synthesize_trace(reference_params(), {}, 0.0, 1);
  auto [corr_id, bg_id] = spectroscopy::deembed(plain);
  CHECK(bg_id.amplitude == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::fabs(bg_id.phase_offset) < 1e-9);
  CHECK(std::fabs(bg_id.electrical_delay) < 1e-18);

  // pure delay background with no resonance: corrected trace is unity
  spectroscopy::ComplexTrace baseline;
  const spectroscopy::DeembedParams bg = reference_background();
  for (int i = 0; i < 101; ++i) {
    const double f = 7.4e9 + i * 2e6;
    baseline.frequency.push_back(f);
    baseline.s11.push_back(bg.amplitude *
                           std::exp(complexd(0.0, bg.phase_offset +
                                                       kTwoPi * bg.electrical_delay * f)));
  }
  auto [corr_flat, bg_flat] = spectroscopy::deembed(baseline);
  for (const auto& v : corr_flat.s11) CHECK(std::abs(v - 1.0) < 1e-9);
  CHECK(bg_flat.amplitude == doctest::Approx(0.8).epsilon(1e-9));

  // idempotence on the corrected trace
  const spectroscopy::ComplexTrace raw =
      spectroscopy::synthesize_trace(reference_params(), bg, 0.0, 1);
  auto [corr1, p1] = spectroscopy::deembed(raw);
  auto [corr2, p2] = spectroscopy::deembed(corr1);
  CHECK(std::fabs(p2.amplitude - 1.0) < 1e-9);
  CHECK(std::fabs(p2.phase_offset) < 1e-9);
  CHECK(std::fabs(p2.electrical_delay * kTwoPi * 7.5e9) < 1e-9);  // phase across the band
  for (std::size_t i = 0; i < corr1.s11.size(); i += 60) {
    CHECK(std::abs(corr2.s11[i] - corr1.s11[i]) < 1e-9);
  }
}

TEST_CASE("insufficient span is rejected") {
  spectroscopy::SynthParams params = reference_params();
  params.span_linewidths = 3.0;  // narrower than the 5-linewidth requirement
  const spectroscopy::ComplexTrace raw =
      spectroscopy::synthesize_trace(params, reference_background(), 0.0, 1);
  try {
    spectroscopy::deembed(raw);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "insufficient-span");
  }
}

TEST_CASE("noiseless resonance fit recovers parameters exactly") {
  const spectroscopy::ComplexTrace trace =
      spectroscopy::synthesize_trace(reference_params(), {}, 0.0, 1);
  const spectroscopy::ResonanceFit fit = spectroscopy::fit_resonance(trace);
  CHECK(fit.f_r == doctest::Approx(7.5e9).epsilon(1e-9));
  CHECK(fit.q_internal == doctest::Approx(2e4).epsilon(1e-6));
  CHECK(fit.q_coupling == doctest::Approx(1e4).epsilon(1e-6));
  CHECK(fit.residual_rms < 1e-10);

  // a caller-provided starting point gives the same optimum
  spectroscopy::FitGuess guess{7.5002e9, 1.5e4, 1.3e4};
  const spectroscopy::ResonanceFit seeded = spectroscopy::fit_resonance(trace, guess);
  CHECK(seeded.f_r == doctest::Approx(fit.f_r).epsilon(1e-10));
  CHECK(seeded.q_internal == doctest::Approx(fit.q_internal).epsilon(1e-8));
}

TEST_CASE("noisy fit statistics over seeds") {
  const double w_r = kTwoPi * 7.5e9;
  std::vector<double> qi_err;
  double f_err_max = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const spectroscopy::ComplexTrace raw =
        spectroscopy::synthesize_trace(reference_params(), reference_background(), 0.01, seed);
    auto [corrected, bg] = spectroscopy::deembed(raw);
    const spectroscopy::ResonanceFit fit = spectroscopy::fit_resonance(corrected);
    qi_err.push_back(std::fabs(fit.q_internal - 2e4) / 2e4);
    f_err_max = std::max(f_err_max, std::fabs(fit.f_r - 7.5e9));
    // reported uncertainty should be in the right ballpark (not 10x off)
    CHECK(fit.standard_error.q_internal > 0.0);
    CHECK(fit.standard_error.q_internal < 0.2 * 2e4);
  }
  std::sort(qi_err.begin(), qi_err.end());
  const double median = qi_err[qi_err.size() / 2];
  const double p95 = qi_err[static_cast<std::size_t>(0.95 * qi_err.size())];
  CHECK(median < 0.02);
  CHECK(p95 < 0.05);
  const double kappa = w_r / 2e4 + w_r / 1e4;
  CHECK(f_err_max < kappa / kTwoPi / 100.0);
}

TEST_CASE("fit rejects absurd quality factors") {
  // constant trace: no resonance to fit
  spectroscopy::ComplexTrace flat;
  for (int i = 0; i < 64; ++i) {
    flat.frequency.push_back(7.4e9 + i * 1e6);
    flat.s11.push_back(complexd(0.9, 0.0));
  }
  CHECK_THROWS_AS(spectroscopy::fit_resonance(flat), Error);
}

TEST_CASE("TLS loss model") {
  spectroscopy::TlsParams params;
  params.tan_delta0_eff = 5.3107e-5;
  params.n_c = 1.0;
  params.beta = 1.0;
  params.q_other = 80341.0;
  params.temperature = 0.02;

  // saturated limit -> q_other
  const std::vector<double> big{1e12};
  CHECK(spectroscopy::qi_vs_photon_number(params, 7.5e9, big)[0] ==
        doctest::Approx(params.q_other).epsilon(1e-3));

  // unsaturated limit at low temperature: 1/Q = tan_delta + 1/q_other
  spectroscopy::TlsParams cold = params;
  cold.temperature = 1e-4;
  const std::vector<double> zero{0.0};
  const double expected = 1.0 / (cold.tan_delta0_eff + 1.0 / cold.q_other);
  CHECK(spectroscopy::qi_vs_photon_number(cold, 7.5e9, zero)[0] ==
        doctest::Approx(expected).epsilon(1e-9));

  // monotone non-decreasing in photon number
  std::vector<double> grid;
  for (int i = 0; i <= 60; ++i) grid.push_back(std::pow(10.0, -2.0 + i * 0.2));
  const std::vector<double> qis = spectroscopy::qi_vs_photon_number(params, 7.5e9, grid);
  for (std::size_t i = 1; i < qis.size(); ++i) CHECK(qis[i] >= qis[i - 1]);

  // parameters chosen to hit Q(1) = 2e4 and Q(1e6) = 8e4
  const std::vector<double> anchors{1.0, 1e6};
  const std::vector<double> q_anchor = spectroscopy::qi_vs_photon_number(params, 7.5e9, anchors);
  CHECK(q_anchor[0] == doctest::Approx(2e4).epsilon(2e-3));
  CHECK(q_anchor[1] == doctest::Approx(8e4).epsilon(2e-3));

  // fit round trip on the power axis recovers the loss tangent
  const std::vector<double> q_curve = spectroscopy::qi_vs_photon_number(params, 7.5e9, grid);
  const spectroscopy::TlsParams fitted = spectroscopy::fit_tls(grid, q_curve, 7.5e9, 0.02, 1.0);
  CHECK(fitted.tan_delta0_eff == doctest::Approx(params.tan_delta0_eff).epsilon(0.10));
  CHECK(fitted.q_other == doctest::Approx(params.q_other).epsilon(0.10));
}

TEST_CASE("intra-resonator photon number") {
  const double kappa = kTwoPi * 750e3;
  const double f_r = 7.5e9;

  // emission relation: n kappa hbar w = P, reference 4270 photons at -100 dBm
  const double p_emitted = 4270.13125721641 * kappa * constants::hbar * kTwoPi * f_r;
  CHECK(p_emitted == doctest::Approx(1e-13).epsilon(1e-5));

  // uncoupled port
  CHECK(spectroscopy::photon_number_from_power(1e-15, f_r, 0.0, kappa, 0.0) == 0.0);

  // critical coupling on resonance, cross-checked against the integrated
  // cavity equation
  const double kc = 0.5 * kappa;
  const double p_in = 1e-15;
  const double analytic = spectroscopy::photon_number_from_power(p_in, f_r, kc, kappa, 0.0);
  const double photon_rate = p_in / (constants::planck * f_r);
  CHECK(analytic == doctest::Approx(photon_rate * kc / (0.25 * kappa * kappa)).epsilon(1e-12));
  CHECK(steady_state_photons(photon_rate, kc, kappa, 0.0) ==
        doctest::Approx(analytic).epsilon(1e-5));

  // detuned case against the same integrator
  const double delta = 0.8 * kappa;
  CHECK(steady_state_photons(photon_rate, kc, kappa, delta) ==
        doctest::Approx(spectroscopy::photon_number_from_power(p_in, f_r, kc, kappa, delta))
            .epsilon(1e-5));
}
