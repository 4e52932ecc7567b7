#pragma once

#include <optional>

namespace ppres::circuit {

// Geometry and material description of the parallel-plate resonator.
// All lengths in meters, sheet kinetic inductance in H per square.
struct DeviceDesign {
  double capacitor_diameter = 0.0;
  double nanowire_length = 0.0;
  double nanowire_width = 0.0;
  double film_thickness = 0.0;
  double dielectric_thickness = 0.0;
  double dielectric_epsilon_r = 1.0;
  double sheet_kinetic_inductance = 0.0;

  void validate() const;  // throws Error("invalid-geometry")
};

// Lumped-element parameters of the resonator mode. Self-consistent:
//   L = hbar*w_r / (2*delta_I^2),  Z = (hbar/2)*(w_r/delta_I)^2 = w_r*L.
struct CircuitParams {
  double f_r = 0.0;                 // Hz
  double inductance = 0.0;          // H
  double kinetic_inductance = 0.0;  // H
  double impedance = 0.0;           // ohm
  double current_zpf = 0.0;         // A

  void validate() const;  // checks positivity and self-consistency to 1e-12
};

struct QualityFactors {
  double q_internal = 0.0;
  double q_coupling = 0.0;
  double q_total = 0.0;
  double kappa = 0.0;    // rad/s
  double kappa_c = 0.0;  // rad/s
  double kappa_i = 0.0;  // rad/s
};

// L_k = L_k_sq * l / w
double kinetic_inductance(const DeviceDesign& design);

// delta_I = sqrt(hbar * 2*pi*f_r / (2 L))
double current_zpf(double inductance, double f_r);

// Z = (hbar/2) * (w_r / delta_I)^2
double impedance(double f_r, double current_zpf);

// Galvanic coupling to a transmission line. Low-impedance resonators keep a
// moderate Q_c from the mismatch; the convention Q_c = line / Z reproduces
// the reference value 66.6 for Z = 0.7508 ohm into 50 ohm.
double galvanic_coupling_q(double resonator_impedance, double line_impedance = 50.0);

// Effective decay rate through an intermediate filter mode (two-mode
// Purcell-filter expression): kappa_box * g_bus^2 / (delta_box^2 + (kappa_box/2)^2).
double filter_coupling_kappa(double g_bus, double delta_box, double kappa_box);

// Fill all six fields from (Q_i, Q_c, f_r).
QualityFactors quality_factors(double q_internal, double q_coupling, double f_r);

// Inputs for deriving CircuitParams from any two of {f_r, L, Z, delta_I}.
struct CircuitSpec {
  std::optional<double> f_r;
  std::optional<double> inductance;
  std::optional<double> impedance;
  std::optional<double> current_zpf;
};

// Solve the mode relations for the remaining quantities. Exactly two fields
// must be set; throws Error("domain-error") otherwise. kinetic_inductance
// is carried through (it is part of L, not derivable from the mode itself).
CircuitParams solve_circuit(const CircuitSpec& spec, double kinetic_inductance = 0.0);

}  // namespace ppres::circuit
