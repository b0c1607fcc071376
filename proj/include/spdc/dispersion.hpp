#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace spdc {

/// One principal axis of the Sellmeier fit  n^2 = A + B/(L^2 - C) - D*L^2,  L in um.
struct SellmeierCoeffs {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  double n_squared(double lambda_um) const;
  double dn2_dlambda(double lambda_um) const;    // d(n^2)/dL, per um
  double d2n2_dlambda2(double lambda_um) const;  // d^2(n^2)/dL^2, per um^2
};

enum class Polarization { pump, spdc };

/// Refractive index and its frequency derivatives at one (wavelength, angle) point.
struct IndexSample {
  double n = 0.0;        // phase index
  double n_group = 0.0;  // c dk/dw
  double gvd = 0.0;      // k'' = d2k/dw2, s^2/m
  double k = 0.0;        // wavevector magnitude n*w/c, rad/m
};

/// Principal-axis dispersion of a biaxial crystal, restricted to propagation in
/// the plane spanned by the two in-plane axes (pump azimuth 90 degrees).  The
/// pump polarization sees the out-of-plane principal index; the down-converted
/// polarization sees the index ellipse of the two in-plane axes.
class DispersionSet {
 public:
  static DispersionSet from_file(const std::string& path);

  const std::string& material() const { return material_; }
  const std::string& citation() const { return citation_; }
  double valid_min() const { return valid_min_m_; }
  double valid_max() const { return valid_max_m_; }
  /// FNV-1a 64 checksum of the raw data file bytes.
  std::uint64_t checksum() const { return checksum_; }

  /// Principal indices (n_pump_axis, n_plane_lo, n_plane_hi) at vacuum wavelength lambda_m.
  std::array<double, 3> principal_indices(double lambda_m) const;

  /// Angle-independent index seen by the pump polarization.
  double index_pump(double lambda_m) const;

  /// Index ellipse for the down-converted polarization at polar angle theta
  /// (from the high-index in-plane axis): 1/n^2 = cos^2/n_lo^2 + sin^2/n_hi^2.
  double index_spdc(double lambda_m, double theta) const;

  /// n, k, group index and GVD at fixed theta, analytic Sellmeier derivatives.
  IndexSample sample(double lambda_m, double theta, Polarization pol) const;

  /// Same quantities by central finite differences in omega; validation path.
  IndexSample sample_fd(double lambda_m, double theta, Polarization pol,
                        double rel_step = 1e-4) const;

  // test support: a set with both in-plane axes identical (collapsed ellipse)
  static DispersionSet collapsed_for_test(const SellmeierCoeffs& pump_axis,
                                          const SellmeierCoeffs& plane_axis,
                                          double valid_min_m, double valid_max_m);

 private:
  void require_in_range(double lambda_m) const;
  void validate() const;

  // 1/n^2 of the spdc ellipse and its first two wavelength derivatives (per um)
  void inv_n2_spdc(double lambda_um, double theta, double& s, double& s1, double& s2) const;

  std::string material_;
  std::string citation_;
  double valid_min_m_ = 0.0;
  double valid_max_m_ = 0.0;
  SellmeierCoeffs pump_ax_, lo_ax_, hi_ax_;
  std::uint64_t checksum_ = 0;
};

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(const void* data, std::size_t size);

}  // namespace spdc
