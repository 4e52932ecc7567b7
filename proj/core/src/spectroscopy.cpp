#include "ppres/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ppres/constants.hpp"
#include "ppres/error.hpp"
#include "ppres/numerics.hpp"

namespace ppres::spectroscopy {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

using complexd = std::complex<double>;

void check_rates(double kappa_c, double kappa_i) {
  require(kappa_c > 0.0 && kappa_i > 0.0, "domain-error", "decay rates must be positive");
}

// Unwrapped phase of z, then least squares against (f - mean(f)).
numerics::LinearFit phase_line(std::span<const double> f, std::span<const complexd> z) {
  std::vector<double> phase(z.size());
  double prev = std::arg(z[0]);
  phase[0] = prev;
  double offset = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    double raw = std::arg(z[i]);
    double d = raw - prev;
    if (d > kPi) offset -= kTwoPi;
    else if (d < -kPi) offset += kTwoPi;
    phase[i] = raw + offset;
    prev = raw;
  }
  return numerics::fit_line(f, phase);
}

struct Seed3 {
  double f_r, kappa_c, kappa_i;
};

// Initial resonance estimate on a (roughly) background-free trace: resonance
// at the point farthest from the baseline 1, linewidth from the contiguous
// half-power run around it, kappa_i/kappa from the circle radius.
Seed3 seed_resonance(std::span<const double> f, std::span<const complexd> z) {
  const std::size_t n = f.size();
  std::vector<double> d2(n);
  std::size_t ipk = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = std::norm(z[i] - 1.0);
    if (d2[i] > d2[ipk]) ipk = i;
  }
  const double half = 0.5 * d2[ipk];
  std::size_t lo = ipk, hi = ipk;
  while (lo > 0 && d2[lo - 1] > half) --lo;
  while (hi + 1 < n && d2[hi + 1] > half) ++hi;
  const double df_min = f[1] - f[0];
  const double fw = std::max(f[hi] - f[lo], 2.0 * df_min);
  const double kappa = fw * kTwoPi;

  CircleFit circle = fit_circle(z);
  double ratio = std::clamp(circle.radius, 1e-3, 0.999);  // kappa_i / kappa
  return {f[ipk], (1.0 - ratio) * kappa, ratio * kappa};
}

struct Fit3Raw {
  double f_r, kappa_c, kappa_i;
  double cost;
  int iterations;
  bool converged;
  std::vector<double> covariance;  // on (f_r/span, ln kc, ln ki)
  double span;
};

Fit3Raw fit3(std::span<const double> f, std::span<const complexd> z, const Seed3& seed) {
  const std::size_t n = f.size();
  const double f_mid = 0.5 * (f.front() + f.back());
  const double span = f.back() - f.front();

  auto residuals = [&](std::span<const double> p, std::span<double> res, double* jac) {
    const double f_r = f_mid + p[0] * span;
    const double kc = std::exp(p[1]);
    const double ki = std::exp(p[2]);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = 2.0 * kTwoPi * (f[i] - f_r);
      const complexd den(kc + ki, u);
      const complexd m = complexd(kc - ki, u) / den;
      const complexd r = m - z[i];
      res[i] = r.real();
      res[n + i] = r.imag();
      if (jac != nullptr) {
        const complexd den2 = den * den;
        const complexd d_fr = complexd(0.0, 2.0 * ki) / den2 * (-2.0 * kTwoPi) * span;
        const complexd d_kc = 2.0 * ki / den2 * kc;
        const complexd d_ki = -complexd(2.0 * kc, 2.0 * u) / den2 * ki;
        const complexd cols[3] = {d_fr, d_kc, d_ki};
        for (int c = 0; c < 3; ++c) {
          jac[i * 3 + c] = cols[c].real();
          jac[(n + i) * 3 + c] = cols[c].imag();
        }
      }
    }
  };

  const double clamp[3] = {0.25, 2.0, 2.0};
  numerics::LmResult best;
  bool have_best = false;
  for (double scale : {1.0, 0.3, 3.0}) {
    std::vector<double> p0{(seed.f_r - f_mid) / span, std::log(seed.kappa_c * scale),
                           std::log(seed.kappa_i * scale)};
    numerics::LmResult r = numerics::levenberg_marquardt(residuals, 2 * n, std::move(p0), clamp);
    if (!have_best || r.cost < best.cost) {
      best = std::move(r);
      have_best = true;
    }
    if (best.cost < 1e-24 * static_cast<double>(n)) break;
  }

  Fit3Raw out;
  out.f_r = f_mid + best.params[0] * span;
  out.kappa_c = std::exp(best.params[1]);
  out.kappa_i = std::exp(best.params[2]);
  out.cost = best.cost;
  out.iterations = best.iterations;
  out.converged = best.converged;
  out.covariance = std::move(best.covariance);
  out.span = span;
  return out;
}

complexd background_at(const DeembedParams& bg, double f) {
  return bg.amplitude * std::exp(complexd(0.0, bg.phase_offset + kTwoPi * bg.electrical_delay * f));
}

double wrap_angle(double a) {
  while (a > kPi) a -= kTwoPi;
  while (a <= -kPi) a += kTwoPi;
  return a;
}

}  // namespace

void ComplexTrace::validate() const {
  require(frequency.size() == s11.size(), "domain-error",
          "trace frequency and value lengths differ");
  require(frequency.size() >= 16, "domain-error", "trace needs at least 16 points");
  for (std::size_t i = 1; i < frequency.size(); ++i) {
    require(frequency[i] > frequency[i - 1], "domain-error",
            "trace frequencies must be strictly increasing");
  }
}

double ResonanceFit::kappa_i() const { return kTwoPi * f_r / q_internal; }
double ResonanceFit::kappa_c() const { return kTwoPi * f_r / q_coupling; }
double ResonanceFit::kappa() const { return kappa_i() + kappa_c(); }

std::complex<double> model_s11(double f, double f_r, double kappa_c, double kappa_i) {
  check_rates(kappa_c, kappa_i);
  require(f > 0.0 && f_r > 0.0, "domain-error", "frequencies must be positive");
  const double dw = kTwoPi * (f - f_r);
  return complexd(kappa_c - kappa_i, 2.0 * dw) / complexd(kappa_c + kappa_i, 2.0 * dw);
}

ComplexTrace synthesize_trace(const SynthParams& params, const DeembedParams& background,
                              double noise_sigma, std::uint64_t seed) {
  require(params.f_r > 0.0 && params.q_internal > 0.0 && params.q_coupling > 0.0, "domain-error",
          "synthesis parameters must be positive");
  require(params.n_points >= 16, "domain-error", "need at least 16 points");
  require(noise_sigma >= 0.0, "domain-error", "noise sigma must be >= 0");

  const double w_r = kTwoPi * params.f_r;
  const double kappa = w_r / params.q_internal + w_r / params.q_coupling;
  const double span = params.span_linewidths * kappa / kTwoPi;
  const double f0 = params.f_r - 0.5 * span;
  const double step = span / static_cast<double>(params.n_points - 1);

  ComplexTrace trace;
  trace.frequency.resize(params.n_points);
  trace.s11.resize(params.n_points);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < params.n_points; ++i) {
    const double f = f0 + static_cast<double>(i) * step;
    trace.frequency[i] = f;
    complexd value = background_at(background, f) *
                     model_s11(f, params.f_r, w_r / params.q_coupling, w_r / params.q_internal);
    if (noise_sigma > 0.0) {
      value += complexd(noise_sigma * gauss(rng), noise_sigma * gauss(rng));
    }
    trace.s11[i] = value;
  }
  return trace;
}

CircleFit fit_circle(std::span<const std::complex<double>> points) {
  require(points.size() >= 3, "domain-error", "circle fit needs >= 3 points");
  // Kasa fit on centroid-shifted coordinates: minimize
  // sum (u^2 + v^2 - 2 cu u - 2 cv v - c)^2, linear in (2cu, 2cv, c).
  // Centering keeps the normal equations well conditioned for small arcs
  // far from the origin.
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.real();
    my += p.imag();
  }
  mx /= n;
  my /= n;

  double suu = 0, suv = 0, su = 0, svv = 0, sv = 0;
  double suz = 0, svz = 0, sz = 0;
  for (const auto& p : points) {
    const double u = p.real() - mx, v = p.imag() - my;
    const double zq = u * u + v * v;
    suu += u * u;
    suv += u * v;
    svv += v * v;
    su += u;
    sv += v;
    suz += u * zq;
    svz += v * zq;
    sz += zq;
  }
  std::vector<double> a{suu, suv, su, suv, svv, sv, su, sv, n};
  std::vector<double> b{suz, svz, sz};
  require(numerics::solve_linear(std::move(a), b, 3), "domain-error",
          "degenerate circle fit (collinear points?)");
  CircleFit fit;
  const double cu = 0.5 * b[0];
  const double cv = 0.5 * b[1];
  fit.center_x = cu + mx;
  fit.center_y = cv + my;
  const double r2 = b[2] + cu * cu + cv * cv;
  fit.radius = r2 > 0.0 ? std::sqrt(r2) : 0.0;
  double ss = 0.0;
  for (const auto& p : points) {
    const double d = std::hypot(p.real() - fit.center_x, p.imag() - fit.center_y) - fit.radius;
    ss += d * d;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

std::pair<ComplexTrace, DeembedParams> deembed(const ComplexTrace& trace) {
  trace.validate();
  const std::size_t n = trace.frequency.size();
  std::span<const double> f(trace.frequency);
  std::span<const complexd> z(trace.s11);
  const double f_mid = 0.5 * (f.front() + f.back());
  const double span = f.back() - f.front();

  // Stage 1: delay from the off-resonant phase slope on the outer 20%,
  // amplitude and offset from the rotated off-resonant mean.
  const std::size_t m = std::max<std::size_t>(n / 10, 3);
  numerics::LinearFit left = phase_line(f.subspan(0, m), z.subspan(0, m));
  numerics::LinearFit right = phase_line(f.subspan(n - m, m), z.subspan(n - m, m));
  double tau = 0.5 * (left.slope + right.slope) / kTwoPi;
  complexd mean(0.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= m && i < n - m) continue;
    mean += z[i] * std::exp(complexd(0.0, -kTwoPi * tau * (f[i] - f_mid)));
  }
  mean /= static_cast<double>(2 * m);
  double amplitude = std::abs(mean);
  require(amplitude > 0.0, "domain-error", "degenerate trace (zero baseline)");
  double psi = std::arg(mean);  // phase at f_mid

  DeembedParams bg;
  bg.amplitude = amplitude;
  bg.electrical_delay = tau;
  bg.phase_offset = wrap_angle(psi - kTwoPi * tau * f_mid);

  // Baseline-only input: nothing left after background removal.
  std::vector<complexd> corrected(n);
  double dip = 0.0;
  double noise_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    corrected[i] = trace.s11[i] / background_at(bg, f[i]);
    dip = std::max(dip, std::abs(corrected[i] - 1.0));
    if (i > 0) noise_sq += std::norm(corrected[i] - corrected[i - 1]);
  }
  const double sigma_est = std::sqrt(noise_sq / (2.0 * static_cast<double>(n - 1)) / 2.0);
  if (dip < std::max(1e-6, 6.0 * sigma_est)) {
    ComplexTrace out;
    out.frequency = trace.frequency;
    out.s11 = std::move(corrected);
    out.power_dbm = trace.power_dbm;
    return {std::move(out), bg};
  }

  // Stage 2: joint fit of background x resonance on the raw trace.
  Seed3 seed = seed_resonance(f, corrected);
  auto residuals = [&](std::span<const double> p, std::span<double> res, double* jac) {
    const double f_r = f_mid + p[0] * span;
    const double kc = std::exp(p[1]);
    const double ki = std::exp(p[2]);
    const double a = std::exp(p[3]);
    const double psi0 = p[4];
    const double tau_l = p[5] / span;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = 2.0 * kTwoPi * (f[i] - f_r);
      const complexd den(kc + ki, u);
      const complexd s = complexd(kc - ki, u) / den;
      const complexd b = a * std::exp(complexd(0.0, psi0 + kTwoPi * tau_l * (f[i] - f_mid)));
      const complexd model = b * s;
      const complexd r = model - z[i];
      res[i] = r.real();
      res[n + i] = r.imag();
      if (jac != nullptr) {
        const complexd den2 = den * den;
        const complexd d_fr = b * complexd(0.0, 2.0 * ki) / den2 * (-2.0 * kTwoPi) * span;
        const complexd d_kc = b * (2.0 * ki / den2) * kc;
        const complexd d_ki = b * (-complexd(2.0 * kc, 2.0 * u) / den2) * ki;
        const complexd d_a = model;  // log-amplitude
        const complexd d_psi = complexd(0.0, 1.0) * model;
        const complexd d_tau = complexd(0.0, kTwoPi * (f[i] - f_mid) / span) * model;
        const complexd cols[6] = {d_fr, d_kc, d_ki, d_a, d_psi, d_tau};
        for (int c = 0; c < 6; ++c) {
          jac[i * 6 + c] = cols[c].real();
          jac[(n + i) * 6 + c] = cols[c].imag();
        }
      }
    }
  };
  const double clamp[6] = {0.25, 2.0, 2.0, 2.0, 1.5, 0.5};
  numerics::LmResult best;
  bool have_best = false;
  for (double scale : {1.0, 0.3, 3.0}) {
    std::vector<double> p0{(seed.f_r - f_mid) / span,
                           std::log(seed.kappa_c * scale),
                           std::log(seed.kappa_i * scale),
                           std::log(amplitude),
                           psi,
                           tau * span};
    numerics::LmResult r = numerics::levenberg_marquardt(residuals, 2 * n, std::move(p0), clamp);
    if (!have_best || r.cost < best.cost) {
      best = std::move(r);
      have_best = true;
    }
    if (best.cost < 1e-24 * static_cast<double>(n)) break;
  }
  require(best.converged, "fit-failed", "joint background fit did not converge");

  const double kappa_fit = std::exp(best.params[1]) + std::exp(best.params[2]);
  if (span < 5.0 * kappa_fit / kTwoPi) {
    fail("insufficient-span",
         "trace spans fewer than 5 linewidths around the resonance; cannot identify the baseline");
  }

  tau = best.params[5] / span;
  amplitude = std::exp(best.params[3]);
  bg.amplitude = amplitude;
  bg.electrical_delay = tau;
  bg.phase_offset = wrap_angle(best.params[4] - kTwoPi * tau * f_mid);

  ComplexTrace out;
  out.frequency = trace.frequency;
  out.s11.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.s11[i] = trace.s11[i] / background_at(bg, f[i]);
  out.power_dbm = trace.power_dbm;
  return {std::move(out), bg};
}

ResonanceFit fit_resonance(const ComplexTrace& trace, std::optional<FitGuess> guess) {
  trace.validate();
  std::span<const double> f(trace.frequency);
  std::span<const complexd> z(trace.s11);

  Seed3 seed{};
  if (guess) {
    require(guess->f_r > 0.0 && guess->q_internal > 0.0 && guess->q_coupling > 0.0, "domain-error",
            "initial guess must be positive");
    const double w_r = kTwoPi * guess->f_r;
    seed = {guess->f_r, w_r / guess->q_coupling, w_r / guess->q_internal};
  } else {
    seed = seed_resonance(f, z);
  }

  Fit3Raw raw = fit3(f, z, seed);
  const std::size_t n = f.size();
  if (!raw.converged) {
    fail("fit-failed", "resonance fit did not converge; best residual rms " +
                           std::to_string(std::sqrt(raw.cost / static_cast<double>(2 * n))));
  }

  ResonanceFit fit;
  fit.f_r = raw.f_r;
  fit.q_internal = kTwoPi * raw.f_r / raw.kappa_i;
  fit.q_coupling = kTwoPi * raw.f_r / raw.kappa_c;
  fit.residual_rms = std::sqrt(raw.cost / static_cast<double>(2 * n));
  fit.iterations = raw.iterations;

  for (double q : {fit.q_internal, fit.q_coupling}) {
    if (q < 1.0 || q > 1e9) {
      fail("rejected-fit", "fitted Q = " + std::to_string(q) + " outside [1, 1e9]");
    }
  }

  // Parameter standard errors from the residual covariance, propagated from
  // (f_r/span, ln kappa_c, ln kappa_i) to (f_r, Q_i, Q_c).
  if (!raw.covariance.empty() && 2 * n > 3) {
    const double variance = raw.cost / static_cast<double>(2 * n - 3);
    auto cov = [&](int a, int b) { return raw.covariance[a * 3 + b] * variance; };
    fit.standard_error.f_r = raw.span * std::sqrt(std::max(cov(0, 0), 0.0));
    // Q = 2 pi f_r / kappa: dQ/Q = (span/f_r) dp0 - dln(kappa)
    auto q_err = [&](int k_index, double q) {
      const double g0 = raw.span / fit.f_r;
      double var = g0 * g0 * cov(0, 0) + cov(k_index, k_index) - 2.0 * g0 * cov(0, k_index);
      return q * std::sqrt(std::max(var, 0.0));
    };
    fit.standard_error.q_coupling = q_err(1, fit.q_coupling);
    fit.standard_error.q_internal = q_err(2, fit.q_internal);
  }
  return fit;
}

void TlsParams::validate() const {
  require(tan_delta0_eff > 0.0 && n_c > 0.0 && q_other > 0.0 && temperature > 0.0, "domain-error",
          "TLS parameters must be positive");
  require(beta > 0.0 && beta <= 2.0, "domain-error", "beta must lie in (0, 2]");
}

std::vector<double> qi_vs_photon_number(const TlsParams& params, double f_r,
                                        std::span<const double> n_bar) {
  params.validate();
  require(f_r > 0.0, "domain-error", "f_r must be positive");
  const double thermal =
      std::tanh(constants::hbar * kTwoPi * f_r / (2.0 * constants::boltzmann * params.temperature));
  std::vector<double> out;
  out.reserve(n_bar.size());
  for (double n : n_bar) {
    require(n >= 0.0, "domain-error", "photon number must be >= 0");
    const double tls = params.tan_delta0_eff * thermal /
                       std::pow(1.0 + n / params.n_c, 0.5 * params.beta);
    out.push_back(1.0 / (tls + 1.0 / params.q_other));
  }
  return out;
}

TlsParams fit_tls(std::span<const double> n_bar, std::span<const double> q_internal, double f_r,
                  double temperature, double beta) {
  require(n_bar.size() == q_internal.size() && n_bar.size() >= 3, "domain-error",
          "TLS fit needs >= 3 (n, Q_i) points");
  const std::size_t n = n_bar.size();

  // log-space residuals; parameters (ln tan_delta0_eff, ln n_c, ln q_other)
  auto model = [&](const TlsParams& p) { return qi_vs_photon_number(p, f_r, n_bar); };
  auto residuals = [&](std::span<const double> p, std::span<double> res, double* jac) {
    TlsParams t;
    t.tan_delta0_eff = std::exp(p[0]);
    t.n_c = std::exp(p[1]);
    t.q_other = std::exp(p[2]);
    t.beta = beta;
    t.temperature = temperature;
    std::vector<double> q = model(t);
    for (std::size_t i = 0; i < n; ++i) res[i] = std::log(q[i] / q_internal[i]);
    if (jac != nullptr) {
      const double h = 1e-6;
      for (int c = 0; c < 3; ++c) {
        TlsParams tp = t;
        double* field = c == 0 ? &tp.tan_delta0_eff : (c == 1 ? &tp.n_c : &tp.q_other);
        *field *= std::exp(h);
        std::vector<double> qp = model(tp);
        for (std::size_t i = 0; i < n; ++i) jac[i * 3 + c] = std::log(qp[i] / q[i]) / h;
      }
    }
  };

  // seed: q_other from the high-power plateau, loss tangent from the
  // low-power end, n_c = 1
  const double q_hi = q_internal.back();
  const double q_lo = q_internal.front();
  const double tan0 = std::max(1.0 / q_lo - 1.0 / (q_hi * 1.5), 1e-12);
  std::vector<double> p0{std::log(tan0), 0.0, std::log(q_hi * 1.5)};
  const double clamp[3] = {2.0, 2.0, 2.0};
  numerics::LmResult r = numerics::levenberg_marquardt(residuals, n, std::move(p0), clamp);
  require(r.converged, "fit-failed", "TLS fit did not converge");

  TlsParams out;
  out.tan_delta0_eff = std::exp(r.params[0]);
  out.n_c = std::exp(r.params[1]);
  out.q_other = std::exp(r.params[2]);
  out.beta = beta;
  out.temperature = temperature;
  return out;
}

double photon_number_from_power(double p_in, double f_r, double kappa_c, double kappa,
                                double probe_detuning) {
  require(p_in >= 0.0, "domain-error", "input power must be >= 0");
  require(f_r > 0.0 && kappa > 0.0, "domain-error", "f_r and kappa must be positive");
  require(kappa_c >= 0.0 && kappa_c <= kappa, "domain-error", "kappa_c must lie in [0, kappa]");
  const double half = 0.5 * kappa;
  const double photon_rate = p_in / (constants::planck * f_r);
  return photon_rate * kappa_c / (half * half + probe_detuning * probe_detuning);
}

}  // namespace ppres::spectroscopy
