#pragma once

#include <optional>
#include <vector>

#include "spdc/dispersion.hpp"

namespace spdc {

/// Crystal properties entering the rate formulas.
struct CrystalParams {
  double length = 600e-6;  // m
  double d_eff = 2.8e-12;  // m/V
  const DispersionSet* dispersion = nullptr;
};

enum class Preset {
  collinear_degenerate,
  noncollinear_degenerate,
  collinear_nondegenerate,
  noncollinear_nondegenerate,
};

/// Carrier frequencies and emission angles of one phase-matched configuration.
/// Angles theta_s/theta_i are interior magnitudes, signal and idler on opposite
/// sides of the pump; the down-converted index is evaluated at the pump polar
/// angle theta_p for both beams, so degenerate configurations are exactly
/// symmetric.
struct Geometry {
  double theta_p = 0.0;      // pump polar angle w.r.t. crystal axes, rad
  double theta_s = 0.0;      // interior signal emission angle, rad
  double theta_i = 0.0;      // interior idler emission angle, rad
  double theta_s_ext = 0.0;  // exterior angles via Snell at carrier indices
  double theta_i_ext = 0.0;
  double omega_p = 0.0;   // rad/s
  double omega_s0 = 0.0;  // carrier, rad/s
  double omega_i0 = 0.0;  // omega_p - omega_s0
  bool degenerate = false;
};

struct PhaseMismatch {
  double dk_y = 0.0;  // k_s sin(th_s) - k_i sin(th_i), rad/m
  double dk_z = 0.0;  // k_p - k_s cos(th_s) - k_i cos(th_i), rad/m
};

/// Exactly one of the two must be set for noncollinear presets.
struct GeometryConstraint {
  std::optional<double> theta_p;             // rad
  std::optional<double> exterior_angle;      // target exterior signal angle, rad
};

struct SolveResult {
  Geometry geometry;
  std::vector<Geometry> alternates;  // flagged additional roots, if any
  double residual_dk_y = 0.0;        // rad/m at the carrier
  double residual_dk_z = 0.0;
};

/// Snell refraction at the crystal face with a fixed index.
double exterior_angle(double theta_interior, double n);
double interior_angle(double theta_exterior, double n);

/// Solves the carrier phase-matching conditions for the given preset.
/// lambda_p: pump vacuum wavelength; lambda_s: signal carrier wavelength
/// (ignored for degenerate presets, where it is 2*lambda_p).
SolveResult solve_geometry(Preset preset, const CrystalParams& crystal, double lambda_p,
                           std::optional<double> lambda_s,
                           const GeometryConstraint& constraint);

/// Exact phase mismatch at signal frequency omega_s with the geometry's fixed
/// interior angles and carrier-angle indices.
PhaseMismatch phase_mismatch(const Geometry& g, const CrystalParams& crystal, double omega_s);

/// Quadratic/linear expansion around the degenerate carrier:
///   dk_z = -k'' cos(th) (w - wp/2)^2,  dk_y = 2 n_g sin(th) (w - wp/2) / c.
PhaseMismatch taylor_mismatch_degenerate(const Geometry& g, const CrystalParams& crystal,
                                         double omega_s);

/// One wavelength sample of an emission-angle curve; branches lists the
/// exterior angle of every phase-matched emission solution at this wavelength.
struct EmissionSample {
  double lambda = 0.0;  // signal vacuum wavelength, m
  std::vector<double> branches;  // exterior angles, rad
};

/// Exterior opening angle vs signal wavelength at fixed crystal tilt.  Empty
/// branch lists mark wavelengths with no phase-matched emission.
std::vector<EmissionSample> emission_angle_curve(double theta_p, const CrystalParams& crystal,
                                                 double lambda_p, double lambda_lo,
                                                 double lambda_hi, int n_points);

/// Signal wavelengths at which emission is exactly collinear at this tilt
/// (boundaries of the emission band).
std::vector<double> collinear_wavelengths(double theta_p, const CrystalParams& crystal,
                                          double lambda_p);

}  // namespace spdc
