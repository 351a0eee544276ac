#pragma once

namespace atomchip::constants {

// CODATA 2018 values, SI units.
inline constexpr double hbar = 1.054571817e-34;    // J s
inline constexpr double h_planck = 6.62607015e-34; // J s
inline constexpr double k_B = 1.380649e-23;        // J/K
inline constexpr double mu_B = 9.2740100783e-24;   // J/T
inline constexpr double mu_0 = 1.25663706212e-6;   // T m/A
inline constexpr double amu = 1.66053906660e-27;   // kg
inline constexpr double a_bohr = 5.29177210903e-11; // m

inline constexpr double gauss = 1e-4; // T

inline constexpr double rb87_mass = 86.909180527 * amu;      // kg
inline constexpr double rb87_scattering_length = 98.0 * a_bohr; // m

} // namespace atomchip::constants
