#pragma once

#include <numbers>

// CODATA-2018 exact and recommended values, SI units, per molecule.
namespace tunnelkit::constants {

inline constexpr double k_B = 1.380649e-23;          // J/K (exact)
inline constexpr double h = 6.62607015e-34;          // J s (exact)
inline constexpr double hbar = h / (2.0 * std::numbers::pi);
inline constexpr double N_A = 6.02214076e23;         // 1/mol (exact)
inline constexpr double R = k_B * N_A;               // J/(mol K)
inline constexpr double amu = 1.66053906660e-27;     // kg
inline constexpr double c = 299792458.0;             // m/s (exact)
inline constexpr double cm1_to_radps = 2.0 * std::numbers::pi * c * 100.0;
inline constexpr double kJmol_to_J = 1.0e3 / N_A;
inline constexpr double angstrom = 1.0e-10;

// Atomic masses used as the default transferred-particle masses.
inline constexpr double mass_H_amu = 1.00782503207;
inline constexpr double mass_D_amu = 2.01410177812;

inline constexpr double ln10 = std::numbers::ln10;

}  // namespace tunnelkit::constants
