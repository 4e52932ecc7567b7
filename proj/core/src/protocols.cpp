#include "ppres/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ppres/constants.hpp"
#include "ppres/error.hpp"
#include "ppres/numerics.hpp"

namespace ppres::protocols {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double dbm_from_watts(double p) {
  if (p <= 0.0) return -kInf;
  return 10.0 * std::log10(p / 1e-3);
}
}  // namespace

void PhotonCountingScenario::validate() const {
  require(t1 >= 0.0, "domain-error", "T1 must be >= 0");
  require(dark_rate >= 0.0, "domain-error", "dark-count rate must be >= 0");
  require(efficiency > 0.0 && efficiency <= 1.0, "domain-error", "efficiency must be in (0, 1]");
  require(snr_target > 0.0, "domain-error", "SNR target must be positive");
}

double pc_snr(const PhotonCountingScenario& s, double tau_m) {
  s.validate();
  require(tau_m > 0.0, "domain-error", "integration time must be positive");
  require(s.t1 > 0.0, "domain-error", "T1 must be positive");
  const double noise = 2.0 * s.t1 * s.dark_rate + s.efficiency * (1.0 - s.efficiency);
  if (noise == 0.0) return kInf;  // perfect detector, no dark counts
  return s.efficiency * std::sqrt(tau_m / s.t1) / std::sqrt(noise);
}

double pc_integration_time(const PhotonCountingScenario& s) {
  s.validate();
  require(s.t1 > 0.0, "domain-error", "T1 must be positive");
  const double ratio = s.snr_target / s.efficiency;
  return ratio * ratio * s.t1 * (2.0 * s.t1 * s.dark_rate + s.efficiency * (1.0 - s.efficiency));
}

CountingRegime pc_regime(const PhotonCountingScenario& s) {
  s.validate();
  const double dark = 2.0 * s.t1 * s.dark_rate;
  const double shot = s.efficiency * (1.0 - s.efficiency);
  if (dark < shot / 10.0) return CountingRegime::shot_noise_limited;
  if (dark > shot * 10.0) return CountingRegime::dark_count_limited;
  return CountingRegime::crossover;
}

std::string to_string(CountingRegime regime) {
  switch (regime) {
    case CountingRegime::shot_noise_limited: return "shot-noise-limited";
    case CountingRegime::crossover: return "crossover";
    case CountingRegime::dark_count_limited: return "dark-count-limited";
  }
  return "?";
}

void DispersiveScenario::validate() const {
  require(g0 > 0.0, "domain-error", "g0 must be positive");
  require(kappa_c > 0.0 && kappa_i > 0.0, "domain-error", "decay rates must be positive");
  require(efficiency > 0.0 && efficiency <= 1.0, "domain-error", "efficiency must be in (0, 1]");
  require(gamma_nr >= 0.0, "domain-error", "non-radiative rate must be >= 0");
  require(f_r > 0.0, "domain-error", "f_r must be positive");
  require(n_crit_safety >= 1.0, "domain-error", "photon-number safety factor must be >= 1");
}

DispersiveScenario critically_coupled(double g0, double q_total, double f_r, double efficiency,
                                      double gamma_nr) {
  require(q_total > 0.0, "domain-error", "Q must be positive");
  DispersiveScenario s;
  s.g0 = g0;
  s.f_r = f_r;
  s.efficiency = efficiency;
  s.gamma_nr = gamma_nr;
  const double kappa = kTwoPi * f_r / q_total;
  s.kappa_c = 0.5 * kappa;
  s.kappa_i = 0.5 * kappa;
  s.validate();
  return s;
}

double purcell_t1_detuned(const DispersiveScenario& s, double delta) {
  s.validate();
  const double kappa = s.kappa();
  const double g_ang = kTwoPi * s.g0;
  const double half = 0.5 * kappa;
  const double lorentz = half * half / (half * half + delta * delta);
  const double rate = 4.0 * g_ang * g_ang / kappa * lorentz + s.gamma_nr;
  require(rate > 0.0, "domain-error", "total decay rate vanished");
  return 1.0 / rate;
}

DispersivePair dispersive_pair(const DispersiveScenario& s, double delta) {
  s.validate();
  require(delta != 0.0, "zero-detuning", "dispersive quantities require a nonzero detuning");
  DispersivePair out;
  const double g_ang = kTwoPi * s.g0;
  out.chi = g_ang * g_ang / delta;
  out.n_crit = delta * delta / (4.0 * g_ang * g_ang);
  const double a = s.kappa_c - s.kappa_i;
  const double k = s.kappa();
  out.s11_ground = std::complex<double>(a, 2.0 * out.chi) / std::complex<double>(k, -2.0 * out.chi);
  out.s11_excited = std::complex<double>(a, -2.0 * out.chi) / std::complex<double>(k, 2.0 * out.chi);
  return out;
}

SnrResult dispersive_snr(const DispersiveScenario& s, double delta, double tau_m,
                         std::optional<double> n_bar) {
  require(tau_m > 0.0, "domain-error", "measurement time must be positive");
  DispersivePair pair = dispersive_pair(s, delta);
  const double n = n_bar.value_or(pair.n_crit / s.n_crit_safety);
  require(n >= 0.0, "domain-error", "photon number must be >= 0");
  const double half = 0.5 * s.kappa();
  SnrResult out;
  out.steady_state_warning = tau_m < 10.0 / s.kappa();
  out.value = std::sqrt(8.0 * n * tau_m * s.efficiency * s.kappa_c /
                        (half * half + pair.chi * pair.chi)) *
              std::fabs(pair.chi);
  return out;
}

FidelityResult total_fidelity(const DispersiveScenario& s, double delta, double tau_m) {
  SnrResult snr = dispersive_snr(s, delta, tau_m);
  const double t1 = purcell_t1_detuned(s, delta);
  FidelityResult out;
  out.excited_population = std::exp(-tau_m / t1);
  out.readout = std::erf(0.5 * snr.value);
  out.total = out.excited_population * out.readout;
  out.steady_state_warning = snr.steady_state_warning;
  return out;
}

std::vector<ReadoutOptimum> optimize_readout(const DispersiveScenario& s,
                                             std::span<const double> delta_grid) {
  s.validate();
  require(!delta_grid.empty(), "domain-error", "detuning grid is empty");
  std::vector<ReadoutOptimum> out;
  out.reserve(delta_grid.size());
  for (double delta : delta_grid) {
    ReadoutOptimum point;
    point.delta = delta;
    try {
      const double t1 = purcell_t1_detuned(s, delta);
      const double lo = std::log(10.0 / s.kappa());
      const double hi = std::log(100.0 * t1);
      require(hi > lo, "domain-error", "degenerate measurement-time bracket");
      auto objective = [&](double log_tau) {
        return total_fidelity(s, delta, std::exp(log_tau)).total;
      };
      const double log_tau = numerics::golden_section_maximize(objective, lo, hi, 1e-3);
      require(log_tau > lo + 2e-3 && log_tau < hi - 2e-3, "bracket-failure",
              "fidelity optimum sits on the bracket edge");
      point.tau_m = std::exp(log_tau);
      FidelityResult f = total_fidelity(s, delta, point.tau_m);
      DispersivePair pair = dispersive_pair(s, delta);
      point.fidelity = f.total;
      point.readout_fidelity = f.readout;
      point.excited_population = f.excited_population;
      point.n_bar = pair.n_crit / s.n_crit_safety;
      point.t1 = t1;
      point.power_dbm = twpa_power_check(point.n_bar, s.kappa(), s.f_r).power_dbm;
      point.ok = true;
    } catch (const Error& e) {
      point.ok = false;
      point.error = e.code();
    }
    out.push_back(std::move(point));
  }
  return out;
}

PowerCheck twpa_power_check(double n_bar, double kappa, double f_r, double saturation_dbm) {
  require(n_bar >= 0.0, "domain-error", "photon number must be >= 0");
  require(kappa > 0.0 && f_r > 0.0, "domain-error", "kappa and f_r must be positive");
  PowerCheck out;
  const double power = n_bar * kappa * constants::hbar * kTwoPi * f_r;
  out.power_dbm = dbm_from_watts(power);
  out.within_budget = out.power_dbm < saturation_dbm;
  return out;
}

McEstimate mc_photon_counting(const PhotonCountingScenario& s, double tau_m, std::size_t trials,
                              std::uint64_t seed) {
  s.validate();
  require(s.t1 > 0.0, "domain-error", "T1 must be positive");
  require(tau_m > 0.0, "domain-error", "integration time must be positive");
  require(trials >= 1000, "domain-error", "need >= 1000 trials");

  const double emitted = tau_m / s.t1;
  const long long whole = static_cast<long long>(std::floor(emitted));
  const double frac = emitted - static_cast<double>(whole);
  const double dark_mean = s.dark_rate * tau_m;

  std::mt19937_64 rng(seed);
  std::binomial_distribution<long long> detect(std::max(whole, 0LL), s.efficiency);
  std::bernoulli_distribution extra_detected(frac * s.efficiency);
  std::poisson_distribution<long long> dark(std::max(dark_mean, 1e-300));

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    long long counts = whole > 0 ? detect(rng) : 0;
    if (frac > 0.0) counts += extra_detected(rng) ? 1 : 0;
    if (dark_mean > 0.0) {
      const long long dark_signal = dark(rng);
      const long long dark_reference = dark(rng);
      counts += dark_signal - dark_reference;
    }
    const double d = static_cast<double>(counts);
    sum += d;
    sum_sq += d * d;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);

  McEstimate est;
  est.trials = trials;
  if (var == 0.0) {
    est.snr = kInf;
    est.std_error = 0.0;
    return est;
  }
  const double sd = std::sqrt(var);
  est.snr = mean / sd;
  // Gaussian-approximation error of a mean/std ratio
  est.std_error = std::sqrt((1.0 + 0.5 * est.snr * est.snr) / n);
  return est;
}

McEstimate mc_dispersive(const DispersiveScenario& s, double delta, double tau_m,
                         std::size_t trials, std::uint64_t seed, std::optional<double> n_bar) {
  require(trials >= 1000, "domain-error", "need >= 1000 trials");
  require(tau_m > 0.0, "domain-error", "measurement time must be positive");
  DispersivePair pair = dispersive_pair(s, delta);
  const double n_photons = n_bar.value_or(pair.n_crit / s.n_crit_safety);
  const double half = 0.5 * s.kappa();
  const double photon_rate = n_photons * (half * half + pair.chi * pair.chi) / s.kappa_c;
  const double amp = std::sqrt(2.0 * photon_rate * tau_m * s.efficiency);

  const std::complex<double> mu_g = pair.s11_ground * amp;
  const std::complex<double> mu_e = pair.s11_excited * amp;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> zg(trials), ze(trials);
  std::complex<double> mean_g(0.0, 0.0), mean_e(0.0, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    zg[t] = mu_g + std::complex<double>(gauss(rng), gauss(rng));
    ze[t] = mu_e + std::complex<double>(gauss(rng), gauss(rng));
    mean_g += zg[t];
    mean_e += ze[t];
  }
  const double n = static_cast<double>(trials);
  mean_g /= n;
  mean_e /= n;
  std::complex<double> sep = mean_e - mean_g;
  const double sep_abs = std::abs(sep);

  // pooled standard deviation of both clouds projected on the separation axis
  std::complex<double> axis = sep_abs > 0.0 ? sep / sep_abs : std::complex<double>(1.0, 0.0);
  double ss = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double pg = std::real(std::conj(axis) * (zg[t] - mean_g));
    const double pe = std::real(std::conj(axis) * (ze[t] - mean_e));
    ss += pg * pg + pe * pe;
  }
  const double sd = std::sqrt(ss / (2.0 * n - 2.0));

  McEstimate est;
  est.trials = trials;
  est.snr = sep_abs / sd;
  est.std_error = std::sqrt(2.0 / n + est.snr * est.snr / (4.0 * n));
  return est;
}

}  // namespace ppres::protocols
