#pragma once

// Physical constants, CODATA-2018 exact/recommended values. SI units.
namespace spectro::constants {

inline constexpr double h = 6.62607015e-34;        // Planck, J s (exact)
inline constexpr double hbar = 1.054571817e-34;    // J s
inline constexpr double mu_B = 9.2740100783e-24;   // Bohr magneton, J/T
inline constexpr double mu_0 = 1.25663706212e-6;   // vacuum permeability, N/A^2
inline constexpr double k_B = 1.380649e-23;        // Boltzmann, J/K (exact)
inline constexpr double eps_0 = 8.8541878128e-12;  // vacuum permittivity, F/m
inline constexpr double c_light = 299792458.0;     // m/s (exact)

// Yttrium cation density in Y2O3, m^-3. ppm spin densities are relative to this.
inline constexpr double n_yttrium = 2.66e28;

// gyromagnetic scale: gamma = g * mu_B / h, Hz per tesla per unit g
inline constexpr double gamma_per_g = mu_B / h;

}  // namespace spectro::constants
