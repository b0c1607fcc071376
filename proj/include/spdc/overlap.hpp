#pragma once

#include <complex>

#include "spdc/geometry.hpp"

namespace spdc {

/// Pump/target beam parameters. Waists are 1/e field radii at the crystal.
struct BeamConfig {
  double waist_pump = 250e-6;   // m
  double waist_signal = 100e-6;
  double waist_idler = 100e-6;
  double pump_power = 1e-3;     // W
  double eta_signal = 1.0;      // path efficiency in [0,1]
  double eta_idler = 1.0;
  double lambda_pump = 355e-9;  // m

  double alpha_squared(double waist) const;  // 2/(pi W^2)
};

/// Transverse overlap constants of the three Gaussian envelopes:
///   A = 1/Wp^2 + 1/Ws^2 + 1/Wi^2
///   C = 1/Wp^2 + cos^2(th_s)/Ws^2 + cos^2(th_i)/Wi^2
///   D = sin(2 th_s)/Ws^2 - sin(2 th_i)/Wi^2
struct OverlapConstants {
  double a = 0.0;  // 1/m^2
  double c = 0.0;
  double d = 0.0;
};

OverlapConstants overlap_constants(const BeamConfig& beams, const Geometry& g);

enum class Arm { signal, idler };

/// Fundamental efficiency function
///   Phi = pi L / sqrt(AC) * exp(-dk_y^2/(4C)) * sinc(dk_z L / 2),  sinc(x)=sin(x)/x.
std::complex<double> phi00(const OverlapConstants& oc, const PhaseMismatch& dk, double length);

/// Generalized efficiency function: overlap of the pump Gaussian, the detected
/// arm's Gaussian target mode and the Hermite-Gauss (n, m) companion mode of
/// the other arm, with the crystal-frame tilt kept to first order in z.
/// Zero for odd n; reduces exactly to phi00 at (0, 0).
std::complex<double> phi_nm(int n, int m, const OverlapConstants& oc, const BeamConfig& beams,
                            const Geometry& g, const PhaseMismatch& dk, double length,
                            Arm detected);

/// |2/(A Ws^2) - 1| = 1/(1 + 2 Wp^2/Ws^2) for symmetric target waists; the
/// scale of the lowest higher-order mode contribution under loose pump focus.
double focusing_ratio(const BeamConfig& beams);

struct QuadratureSpec {
  double radius_factor = 5.0;  // transverse truncation, multiples of the largest waist
  int nodes_transverse = 64;   // initial Gauss-Legendre nodes per transverse axis
  int nodes_z = 32;
  int max_doublings = 4;
  double rel_tol = 1e-9;
};

/// Brute-force Gauss-Legendre quadrature of the defining volume integral of
/// phi_nm; validation oracle, independent of the analytic evaluation path.
std::complex<double> numeric_overlap_oracle(int n, int m, const OverlapConstants& oc,
                                            const BeamConfig& beams, const Geometry& g,
                                            const PhaseMismatch& dk, double length,
                                            Arm detected, const QuadratureSpec& spec);

/// z-moment int_{-L/2}^{L/2} z^q exp(i b z) dz, two evaluation routes: a power
/// series used for |b L| small and the closed-form recurrence elsewhere.
std::complex<double> z_moment(int q, double b, double length);
std::complex<double> z_moment_series(int q, double b, double length);
std::complex<double> z_moment_direct(int q, double b, double length);

}  // namespace spdc
