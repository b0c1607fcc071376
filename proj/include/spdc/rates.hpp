#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spdc/overlap.hpp"
#include "spdc/quadrature.hpp"

namespace spdc {

struct SpectralFilter {
  enum class Kind { none, top_hat, long_pass, short_pass, tabulated };
  Kind kind = Kind::none;
  double center = 0.0;  // rad/s (top-hat)
  double width = 0.0;   // full width, rad/s (top-hat)
  double edge = 0.0;    // rad/s (pass filters)
  double peak = 1.0;    // peak transmission in [0,1]
  std::vector<std::pair<double, double>> table;  // (omega, T), ascending omega

  static SpectralFilter open() { return {}; }
  static SpectralFilter top_hat(double center, double width, double peak = 1.0);
  /// Passes wavelengths longer than the edge (omega below edge).
  static SpectralFilter long_pass(double edge_omega, double peak = 1.0);
  /// Passes wavelengths shorter than the edge (omega above edge).
  static SpectralFilter short_pass(double edge_omega, double peak = 1.0);
  static SpectralFilter tabulated(std::vector<std::pair<double, double>> table);

  /// Frequencies at which the transmission is discontinuous.
  std::vector<double> discontinuities() const;
};

double filter_transmission(const SpectralFilter& f, double omega);

/// First-order conversion of a wavelength bandwidth to angular frequency:
/// 2 pi c d_lambda / lambda^2.
double bandwidth_nm_to_angular(double lambda_center_m, double delta_lambda_m);

/// Fully specified source: beams, solved geometry, crystal.
struct SourceSetup {
  BeamConfig beams;
  Geometry geometry;
  CrystalParams crystal;
};

/// dR/dw_s of Eq.-(2) form: joint pair rate per unit signal angular frequency.
double joint_spectral_rate(const SourceSetup& s, double omega_s);

struct ConvergenceDiag {
  double last_increment = 0.0;  // relative change from truncation N-2 to N
  bool warning = false;         // increment above 1%
};

/// Singles spectral rate of one arm at its own frequency omega, truncating the
/// companion Hermite-Gauss sum at n, m <= truncation (odd n vanish).
double singles_spectral_rate(const SourceSetup& s, Arm arm, double omega, int truncation,
                             ConvergenceDiag* diag = nullptr);

/// Integration window of one arm's spectrum around its carrier: outward scan
/// until the singles density falls below 1e-8 of its peak, clamped at the
/// dispersion validity limits and at the midpoint toward any secondary
/// phase-matching branch.
struct Band {
  double lo = 0.0, hi = 0.0;  // detected-arm frequency, rad/s
};
Band detect_band(const SourceSetup& s, Arm arm, int truncation);

/// Secondary zero of dk_z away from the carrier (conjugate or parasitic
/// branch), if one exists inside the dispersion-valid range.
std::optional<double> second_branch_omega(const SourceSetup& s);

struct RateOptions {
  int truncation = 10;
  QuadratureOptions quad;
};

IntegralResult total_joint_rate(const SourceSetup& s, const SpectralFilter& f_s,
                                const SpectralFilter& f_i, const RateOptions& opts = {});

IntegralResult total_singles_rate(const SourceSetup& s, Arm arm, const SpectralFilter& f,
                                  const RateOptions& opts = {});

struct RateReport {
  double joint_rate = 0.0;          // Hz
  double singles_rate_signal = 0.0;
  double singles_rate_idler = 0.0;
  double heralding = 0.0;           // R / sqrt(Rs Ri)
  int truncation = 10;
  double joint_error = 0.0;         // quadrature error estimates
  double singles_error_signal = 0.0;
  double singles_error_idler = 0.0;
  ConvergenceDiag mode_sum;         // at the signal carrier
  std::optional<double> second_branch;       // rad/s
  double second_branch_joint_rate = 0.0;     // Hz, reported separately
};

RateReport heralding_efficiency(const SourceSetup& s, const SpectralFilter& f_s,
                                const SpectralFilter& f_i, const RateOptions& opts = {});

/// Spectral densities on a uniform frequency grid across the detected band.
/// Rows are signal frequency; the idler column is dR_i/dw_i at the conjugate
/// frequency w_p - w.
struct SpectralCurve {
  std::vector<double> omega;           // rad/s, strictly increasing
  std::vector<double> joint;           // dimensionless density (s^-1 per rad/s)
  std::vector<double> singles_signal;
  std::vector<double> singles_idler;
  std::string config_hash;
};

SpectralCurve sample_spectra(const SourceSetup& s, int n_points, int truncation);

/// Full width at half maximum of a sampled curve, linear interpolation at the
/// half crossings.
double curve_fwhm(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spdc
