#include "spdc/geometry.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

// Bisection with a secant refinement on a bracketed root.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double flo, double fhi, double xtol) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) {
    std::ostringstream msg;
    msg << "no root in bracket [" << lo << ", " << hi << "], residuals " << flo << ", " << fhi;
    throw SolverError(msg.str());
  }
  for (int it = 0; it < 200 && (hi - lo) > xtol; ++it) {
    // secant candidate, fall back to midpoint when it leaves the bracket
    double x = lo - flo * (hi - lo) / (fhi - flo);
    const double mid = 0.5 * (lo + hi);
    if (!(x > lo && x < hi)) x = mid;
    // keep bisection progress by alternating with the midpoint
    if (it % 2 == 1) x = mid;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (flo * fx < 0.0) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
  }
  return 0.5 * (lo + hi);
}

// Scans [lo, hi] for sign changes and returns the refined roots.
std::vector<double> scan_roots(const std::function<double(double)>& f, double lo, double hi,
                               int n_scan, double xtol) {
  std::vector<double> roots;
  double xa = lo, fa = f(xa);
  for (int i = 1; i <= n_scan; ++i) {
    const double xb = lo + (hi - lo) * i / n_scan;
    const double fb = f(xb);
    if (fa == 0.0)
      roots.push_back(xa);
    else if (fa * fb < 0.0)
      roots.push_back(find_root(f, xa, xb, fa, fb, xtol));
    xa = xb;
    fa = fb;
  }
  if (fa == 0.0) roots.push_back(xa);
  return roots;
}

struct Wavevectors {
  double kp, ks, ki;
};

Wavevectors carrier_wavevectors(const DispersionSet& d, double theta_p, double omega_p,
                                double omega_s) {
  const double omega_i = omega_p - omega_s;
  Wavevectors w;
  w.kp = d.index_pump(wavelength_from_omega(omega_p)) * omega_p / kSpeedOfLight;
  w.ks = d.index_spdc(wavelength_from_omega(omega_s), theta_p) * omega_s / kSpeedOfLight;
  w.ki = d.index_spdc(wavelength_from_omega(omega_i), theta_p) * omega_i / kSpeedOfLight;
  return w;
}

// Interior signal angle -> interior idler angle via the transverse condition
// ks sin(th_s) = ki sin(th_i).
double idler_angle(double theta_s, double ks, double ki) {
  const double s = ks * std::sin(theta_s) / ki;
  if (std::abs(s) > 1.0) throw SolverError("transverse condition has no idler solution");
  return std::asin(s);
}

// Longitudinal residual at fixed tilt for an emission angle theta_s >= 0.
double dkz_at(double theta_s, const Wavevectors& w) {
  const double theta_i = idler_angle(theta_s, w.ks, w.ki);
  return w.kp - w.ks * std::cos(theta_s) - w.ki * std::cos(theta_i);
}

Geometry finish(const DispersionSet& d, double theta_p, double omega_p, double omega_s,
                double theta_s, double theta_i, bool degenerate) {
  Geometry g;
  g.theta_p = theta_p;
  g.theta_s = theta_s;
  g.theta_i = theta_i;
  g.omega_p = omega_p;
  g.omega_s0 = omega_s;
  g.omega_i0 = omega_p - omega_s;
  g.degenerate = degenerate;
  const double ns = d.index_spdc(wavelength_from_omega(omega_s), theta_p);
  const double ni = d.index_spdc(wavelength_from_omega(g.omega_i0), theta_p);
  g.theta_s_ext = exterior_angle(theta_s, ns);
  g.theta_i_ext = exterior_angle(theta_i, ni);
  return g;
}

constexpr double kThetaScanLoDeg = 130.0;
constexpr double kThetaScanHiDeg = 155.0;
constexpr double kAngleTol = 1e-13;

}  // namespace

double exterior_angle(double theta_interior, double n) {
  const double s = n * std::sin(theta_interior);
  if (std::abs(s) > 1.0) throw std::domain_error("total internal reflection in exterior_angle");
  return std::asin(s);
}

double interior_angle(double theta_exterior, double n) {
  return std::asin(std::sin(theta_exterior) / n);
}

SolveResult solve_geometry(Preset preset, const CrystalParams& crystal, double lambda_p,
                           std::optional<double> lambda_s,
                           const GeometryConstraint& constraint) {
  const DispersionSet& d = *crystal.dispersion;
  const double omega_p = omega_from_wavelength(lambda_p);
  const double scan_lo = deg_to_rad(kThetaScanLoDeg);
  const double scan_hi = deg_to_rad(kThetaScanHiDeg);

  const bool degenerate = (preset == Preset::collinear_degenerate ||
                           preset == Preset::noncollinear_degenerate);
  const bool collinear = (preset == Preset::collinear_degenerate ||
                          preset == Preset::collinear_nondegenerate);
  if (!degenerate && !(lambda_s && *lambda_s > 0.0))
    throw ConfigError("nondegenerate preset requires a signal carrier wavelength");
  const double omega_s = degenerate ? 0.5 * omega_p : omega_from_wavelength(*lambda_s);
  if (!(omega_p - omega_s > 0.0))
    throw ConfigError("signal carrier must be below the pump frequency");

  SolveResult res;

  if (collinear) {
    auto f = [&](double tp) {
      const auto w = carrier_wavevectors(d, tp, omega_p, omega_s);
      return w.kp - w.ks - w.ki;
    };
    const auto roots = scan_roots(f, scan_lo, scan_hi, 100, kAngleTol);
    if (roots.empty()) {
      std::ostringstream msg;
      msg << "no collinear phase-matching tilt in [" << kThetaScanLoDeg << ", "
          << kThetaScanHiDeg << "] deg; residual at scan edges " << f(scan_lo) << ", "
          << f(scan_hi);
      throw SolverError(msg.str());
    }
    res.geometry = finish(d, roots.front(), omega_p, omega_s, 0.0, 0.0, degenerate);
    for (std::size_t i = 1; i < roots.size(); ++i)
      res.alternates.push_back(finish(d, roots[i], omega_p, omega_s, 0.0, 0.0, degenerate));
  } else {
    if (constraint.theta_p.has_value() == constraint.exterior_angle.has_value())
      throw ConfigError(
          "noncollinear preset needs exactly one of theta_p or target exterior angle");

    auto solve_angles_at = [&](double tp) -> Geometry {
      const auto w = carrier_wavevectors(d, tp, omega_p, omega_s);
      auto f = [&](double ts) { return dkz_at(ts, w); };
      const double th_max = deg_to_rad(12.0);
      const double f0 = f(0.0), f1 = f(th_max);
      const double ts = find_root(f, 0.0, th_max, f0, f1, kAngleTol);
      return finish(d, tp, omega_p, omega_s, ts, idler_angle(ts, w.ks, w.ki), degenerate);
    };

    if (constraint.theta_p) {
      res.geometry = solve_angles_at(*constraint.theta_p);
    } else {
      const double target = *constraint.exterior_angle;
      auto g = [&](double tp) {
        const auto w = carrier_wavevectors(d, tp, omega_p, omega_s);
        const double ns = w.ks * kSpeedOfLight / omega_s;
        const double ts = interior_angle(target, ns);
        return dkz_at(ts, w);
      };
      const auto roots = scan_roots(g, scan_lo, scan_hi, 100, kAngleTol);
      if (roots.empty()) {
        std::ostringstream msg;
        msg << "no tilt in [" << kThetaScanLoDeg << ", " << kThetaScanHiDeg
            << "] deg emits at exterior angle " << rad_to_deg(target) << " deg";
        throw SolverError(msg.str());
      }
      res.geometry = solve_angles_at(roots.front());
      for (std::size_t i = 1; i < roots.size(); ++i)
        res.alternates.push_back(solve_angles_at(roots[i]));
    }
  }

  const auto mm = phase_mismatch(res.geometry, crystal, res.geometry.omega_s0);
  res.residual_dk_y = mm.dk_y;
  res.residual_dk_z = mm.dk_z;
  return res;
}

PhaseMismatch phase_mismatch(const Geometry& g, const CrystalParams& crystal, double omega_s) {
  const DispersionSet& d = *crystal.dispersion;
  const double omega_i = g.omega_p - omega_s;
  if (!(omega_s > 0.0) || !(omega_i > 0.0))
    throw std::domain_error("signal frequency outside (0, omega_p)");
  const double ks =
      d.index_spdc(wavelength_from_omega(omega_s), g.theta_p) * omega_s / kSpeedOfLight;
  const double ki =
      d.index_spdc(wavelength_from_omega(omega_i), g.theta_p) * omega_i / kSpeedOfLight;
  const double kp =
      d.index_pump(wavelength_from_omega(g.omega_p)) * g.omega_p / kSpeedOfLight;
  PhaseMismatch m;
  m.dk_y = ks * std::sin(g.theta_s) - ki * std::sin(g.theta_i);
  m.dk_z = kp - ks * std::cos(g.theta_s) - ki * std::cos(g.theta_i);
  return m;
}

PhaseMismatch taylor_mismatch_degenerate(const Geometry& g, const CrystalParams& crystal,
                                         double omega_s) {
  if (!g.degenerate) throw ConfigError("taylor_mismatch_degenerate requires a degenerate geometry");
  const DispersionSet& d = *crystal.dispersion;
  const auto s =
      d.sample(wavelength_from_omega(g.omega_s0), g.theta_p, Polarization::spdc);
  const double detuning = omega_s - 0.5 * g.omega_p;
  PhaseMismatch m;
  m.dk_z = -s.gvd * std::cos(g.theta_s) * detuning * detuning;
  m.dk_y = 2.0 * s.n_group * std::sin(g.theta_s) * detuning / kSpeedOfLight;
  return m;
}

std::vector<EmissionSample> emission_angle_curve(double theta_p, const CrystalParams& crystal,
                                                 double lambda_p, double lambda_lo,
                                                 double lambda_hi, int n_points) {
  const DispersionSet& d = *crystal.dispersion;
  const double omega_p = omega_from_wavelength(lambda_p);
  std::vector<EmissionSample> curve;
  curve.reserve(n_points);
  const double th_max = deg_to_rad(12.0);
  for (int i = 0; i < n_points; ++i) {
    EmissionSample sample;
    sample.lambda = lambda_lo + (lambda_hi - lambda_lo) * i / (n_points - 1);
    const double omega_s = omega_from_wavelength(sample.lambda);
    const double omega_i = omega_p - omega_s;
    const double lam_i = wavelength_from_omega(omega_i);
    if (omega_i > 0.0 && lam_i >= d.valid_min() && lam_i <= d.valid_max() &&
        sample.lambda >= d.valid_min() && sample.lambda <= d.valid_max()) {
      const auto w = carrier_wavevectors(d, theta_p, omega_p, omega_s);
      auto f = [&](double ts) { return dkz_at(ts, w); };
      const double ns = w.ks * kSpeedOfLight / omega_s;
      for (double ts : scan_roots(f, 0.0, th_max, 48, 1e-12))
        sample.branches.push_back(exterior_angle(ts, ns));
    }
    curve.push_back(std::move(sample));
  }
  return curve;
}

std::vector<double> collinear_wavelengths(double theta_p, const CrystalParams& crystal,
                                          double lambda_p) {
  const DispersionSet& d = *crystal.dispersion;
  const double omega_p = omega_from_wavelength(lambda_p);
  // signal range limited so that both photons stay inside dispersion validity
  const double om_lo = std::max(omega_from_wavelength(d.valid_max()),
                                omega_p - omega_from_wavelength(d.valid_min()));
  const double om_hi = omega_p - om_lo;
  if (!(om_hi > om_lo)) return {};
  auto f = [&](double om_s) {
    const auto w = carrier_wavevectors(d, theta_p, omega_p, om_s);
    return w.kp - w.ks - w.ki;
  };
  std::vector<double> out;
  for (double om : scan_roots(f, om_lo * 1.0000001, om_hi * 0.9999999, 400, 1.0))
    out.push_back(wavelength_from_omega(om));
  return out;
}

}  // namespace spdc
