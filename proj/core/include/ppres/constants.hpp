#pragma once

// Physical constants, CODATA 2018. Values with more than 10 significant
// digits where the standard defines them exactly.
namespace ppres::constants {

inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double planck = 6.62607015e-34;           // J s, exact
inline constexpr double mu0 = 1.25663706212e-6;            // N / A^2
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J / T
inline constexpr double speed_of_light = 299792458.0;      // m / s, exact
inline constexpr double boltzmann = 1.380649e-23;          // J / K, exact

// Gyromagnetic ratio per unit g-factor, mu_B / h = 13.996 GHz/T.
inline constexpr double bohr_magneton_over_h = bohr_magneton / planck;  // Hz / T

}  // namespace ppres::constants
