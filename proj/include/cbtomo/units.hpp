#pragma once

// Physical constants (SI, exact 2019 values) and the unit conventions used by the
// circuit module: energies as E/h in GHz, capacitance in fF, inductance in nH.

#include <numbers>

namespace cbtomo::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double electron_charge = 1.602176634e-19;  // C
inline constexpr double planck = 6.62607015e-34;            // J s
inline constexpr double hbar = planck / two_pi;             // J s

inline constexpr double femtofarad = 1e-15;
inline constexpr double nanohenry = 1e-9;
inline constexpr double gigahertz = 1e9;
inline constexpr double megahertz = 1e6;

// e^2 / (h * 1 fF) in GHz, about 38.74.
inline constexpr double charging_ghz_per_inverse_ff =
    electron_charge * electron_charge / (planck * femtofarad) / gigahertz;

// Energy in joules to E/h in GHz.
inline constexpr double joule_to_ghz(double joules) { return joules / planck / gigahertz; }

// Frequency (GHz, E/h) to angular frequency in rad/ns.
inline constexpr double ghz_to_angular(double ghz) { return two_pi * ghz; }
inline constexpr double angular_to_ghz(double omega) { return omega / two_pi; }

}  // namespace cbtomo::units
