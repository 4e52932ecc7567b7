#include "ppres/circuit.hpp"

#include <cmath>
#include <string>

#include "ppres/constants.hpp"
#include "ppres/error.hpp"

namespace ppres::circuit {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

void require_positive(double v, const char* name) {
  require(std::isfinite(v) && v > 0.0, "domain-error", std::string(name) + " must be positive");
}
}  // namespace

void DeviceDesign::validate() const {
  require(capacitor_diameter > 0.0 && nanowire_length > 0.0 && nanowire_width > 0.0 &&
              film_thickness > 0.0 && dielectric_thickness > 0.0,
          "invalid-geometry", "all lengths must be positive");
  require(nanowire_width <= capacitor_diameter, "invalid-geometry",
          "nanowire wider than the capacitor");
  require(dielectric_epsilon_r >= 1.0, "invalid-geometry", "epsilon_r must be >= 1");
  require(sheet_kinetic_inductance >= 0.0, "invalid-geometry",
          "sheet kinetic inductance must be >= 0");
}

void CircuitParams::validate() const {
  require(f_r > 0.0 && inductance > 0.0 && impedance > 0.0 && current_zpf > 0.0 &&
              kinetic_inductance > 0.0,
          "domain-error", "circuit parameters must be positive");
  const double w_r = kTwoPi * f_r;
  const double z_check = 0.5 * constants::hbar * (w_r / current_zpf) * (w_r / current_zpf);
  const double l_check = constants::hbar * w_r / (2.0 * current_zpf * current_zpf);
  require(std::fabs(z_check - impedance) <= 1e-12 * impedance, "domain-error",
          "Z inconsistent with (f_r, delta_I)");
  require(std::fabs(l_check - inductance) <= 1e-12 * inductance, "domain-error",
          "L inconsistent with (f_r, delta_I)");
}

double kinetic_inductance(const DeviceDesign& design) {
  require(design.nanowire_width > 0.0 && design.nanowire_length > 0.0, "invalid-geometry",
          "nanowire length and width must be positive");
  require(design.sheet_kinetic_inductance >= 0.0, "invalid-geometry",
          "sheet kinetic inductance must be >= 0");
  return design.sheet_kinetic_inductance * design.nanowire_length / design.nanowire_width;
}

double current_zpf(double inductance, double f_r) {
  require_positive(inductance, "inductance");
  require_positive(f_r, "f_r");
  return std::sqrt(constants::hbar * kTwoPi * f_r / (2.0 * inductance));
}

double impedance(double f_r, double current_zpf) {
  require_positive(f_r, "f_r");
  require_positive(current_zpf, "current_zpf");
  const double ratio = kTwoPi * f_r / current_zpf;
  return 0.5 * constants::hbar * ratio * ratio;
}

double galvanic_coupling_q(double resonator_impedance, double line_impedance) {
  require_positive(resonator_impedance, "resonator impedance");
  require_positive(line_impedance, "line impedance");
  return line_impedance / resonator_impedance;
}

double filter_coupling_kappa(double g_bus, double delta_box, double kappa_box) {
  require_positive(kappa_box, "kappa_box");
  require(std::isfinite(g_bus) && std::isfinite(delta_box), "domain-error",
          "filter coupling inputs must be finite");
  const double half = 0.5 * kappa_box;
  return kappa_box * g_bus * g_bus / (delta_box * delta_box + half * half);
}

QualityFactors quality_factors(double q_internal, double q_coupling, double f_r) {
  require_positive(q_internal, "Q_i");
  require_positive(q_coupling, "Q_c");
  require_positive(f_r, "f_r");
  QualityFactors q;
  q.q_internal = q_internal;
  q.q_coupling = q_coupling;
  q.q_total = 1.0 / (1.0 / q_internal + 1.0 / q_coupling);
  const double w_r = kTwoPi * f_r;
  q.kappa_i = w_r / q_internal;
  q.kappa_c = w_r / q_coupling;
  q.kappa = q.kappa_i + q.kappa_c;
  return q;
}

CircuitParams solve_circuit(const CircuitSpec& spec, double kinetic_inductance) {
  int given = 0;
  given += spec.f_r.has_value();
  given += spec.inductance.has_value();
  given += spec.impedance.has_value();
  given += spec.current_zpf.has_value();
  require(given == 2, "domain-error",
          "exactly two of {f_r, inductance, impedance, current_zpf} must be given");
  require(kinetic_inductance >= 0.0, "domain-error", "kinetic inductance must be >= 0");

  double f_r = 0.0, l = 0.0;
  if (spec.f_r && spec.inductance) {
    f_r = *spec.f_r;
    l = *spec.inductance;
  } else if (spec.f_r && spec.current_zpf) {
    f_r = *spec.f_r;
    require_positive(*spec.current_zpf, "current_zpf");
    l = constants::hbar * kTwoPi * f_r / (2.0 * *spec.current_zpf * *spec.current_zpf);
  } else if (spec.f_r && spec.impedance) {
    f_r = *spec.f_r;
    require_positive(*spec.impedance, "impedance");
    require_positive(f_r, "f_r");
    l = *spec.impedance / (kTwoPi * f_r);
  } else if (spec.inductance && spec.current_zpf) {
    l = *spec.inductance;
    require_positive(l, "inductance");
    require_positive(*spec.current_zpf, "current_zpf");
    f_r = 2.0 * l * *spec.current_zpf * *spec.current_zpf / constants::hbar / kTwoPi;
  } else if (spec.inductance && spec.impedance) {
    l = *spec.inductance;
    require_positive(l, "inductance");
    require_positive(*spec.impedance, "impedance");
    f_r = *spec.impedance / l / kTwoPi;
  } else {  // impedance and current_zpf
    require_positive(*spec.impedance, "impedance");
    require_positive(*spec.current_zpf, "current_zpf");
    const double w_r = *spec.current_zpf * std::sqrt(2.0 * *spec.impedance / constants::hbar);
    f_r = w_r / kTwoPi;
    l = *spec.impedance / w_r;
  }
  require_positive(f_r, "f_r");
  require_positive(l, "inductance");
  require(kinetic_inductance <= l, "domain-error",
          "kinetic inductance exceeds the total inductance");

  CircuitParams out;
  out.f_r = f_r;
  out.inductance = l;
  out.kinetic_inductance = kinetic_inductance;
  out.current_zpf = current_zpf(l, f_r);
  out.impedance = impedance(f_r, out.current_zpf);
  return out;
}

}  // namespace ppres::circuit
