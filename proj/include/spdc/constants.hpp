#pragma once

namespace spdc {

// CODATA 2018
inline constexpr double kSpeedOfLight = 2.99792458e8;        // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double kTwoPiC = 2.0 * kPi * kSpeedOfLight;

inline double omega_from_wavelength(double lambda_m) { return kTwoPiC / lambda_m; }
inline double wavelength_from_omega(double omega) { return kTwoPiC / omega; }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace spdc
