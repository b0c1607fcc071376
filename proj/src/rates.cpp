#include "spdc/rates.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr double kBandThreshold = 1e-8;  // of the peak singles density

double pow2i(int n) { return std::ldexp(1.0, n); }

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Common prefactor of the joint and singles spectral rates, without the path
// efficiencies:  P d^2 as^2 ai^2 ap^2 ws wi / (pi eps0 c^3 ns ni np).
double rate_prefactor(const SourceSetup& s, double omega_s) {
  const double omega_i = s.geometry.omega_p - omega_s;
  const DispersionSet& d = *s.crystal.dispersion;
  const double ns = d.index_spdc(wavelength_from_omega(omega_s), s.geometry.theta_p);
  const double ni = d.index_spdc(wavelength_from_omega(omega_i), s.geometry.theta_p);
  const double np = d.index_pump(wavelength_from_omega(s.geometry.omega_p));
  const double a2 = s.beams.alpha_squared(s.beams.waist_pump) *
                    s.beams.alpha_squared(s.beams.waist_signal) *
                    s.beams.alpha_squared(s.beams.waist_idler);
  return s.beams.pump_power * s.crystal.d_eff * s.crystal.d_eff * a2 * omega_s * omega_i /
         (kPi * kVacuumPermittivity * kSpeedOfLight * kSpeedOfLight * kSpeedOfLight * ns * ni *
          np);
}

double omega_signal_of(const SourceSetup& s, Arm arm, double omega) {
  return arm == Arm::signal ? omega : s.geometry.omega_p - omega;
}

// Sum over companion modes at fixed frequency, divided by |phi00|^2-normalised
// weights: sum_{n even, m} |phi_nm|^2 / (2^(n+m) n! m!).
double mode_sum(const SourceSetup& s, Arm arm, double omega_s, int truncation,
                ConvergenceDiag* diag) {
  const auto oc = overlap_constants(s.beams, s.geometry);
  const auto dk = phase_mismatch(s.geometry, s.crystal, omega_s);
  const double length = s.crystal.length;

  const int top = diag ? truncation + 2 : truncation;
  double total = 0.0;     // through truncation
  double extended = 0.0;  // through truncation + 2, only when diagnosing
  for (int n = 0; n <= top; n += 2) {
    for (int m = 0; m <= top; ++m) {
      const auto phi = phi_nm(n, m, oc, s.beams, s.geometry, dk, length, arm);
      const double term = std::norm(phi) / (pow2i(n + m) * factorial(n) * factorial(m));
      extended += term;
      if (n <= truncation && m <= truncation) total += term;
    }
  }
  if (diag) {
    diag->last_increment = extended > 0.0 ? (extended - total) / extended : 0.0;
    diag->warning = diag->last_increment > 0.01;
  }
  return total;
}

}  // namespace

SpectralFilter SpectralFilter::top_hat(double center, double width, double peak) {
  SpectralFilter f;
  f.kind = Kind::top_hat;
  f.center = center;
  f.width = width;
  f.peak = peak;
  if (width < 0.0 || peak < 0.0 || peak > 1.0) throw ConfigError("invalid top-hat filter");
  return f;
}

SpectralFilter SpectralFilter::long_pass(double edge_omega, double peak) {
  SpectralFilter f;
  f.kind = Kind::long_pass;
  f.edge = edge_omega;
  f.peak = peak;
  if (peak < 0.0 || peak > 1.0) throw ConfigError("invalid long-pass filter");
  return f;
}

SpectralFilter SpectralFilter::short_pass(double edge_omega, double peak) {
  SpectralFilter f;
  f.kind = Kind::short_pass;
  f.edge = edge_omega;
  f.peak = peak;
  if (peak < 0.0 || peak > 1.0) throw ConfigError("invalid short-pass filter");
  return f;
}

SpectralFilter SpectralFilter::tabulated(std::vector<std::pair<double, double>> table) {
  SpectralFilter f;
  f.kind = Kind::tabulated;
  f.table = std::move(table);
  if (f.table.size() < 2) throw ConfigError("tabulated filter needs at least two samples");
  f.peak = 0.0;
  for (std::size_t i = 0; i < f.table.size(); ++i) {
    if (i > 0 && !(f.table[i].first > f.table[i - 1].first))
      throw ConfigError("tabulated filter: frequencies must be strictly increasing");
    if (f.table[i].second < 0.0 || f.table[i].second > 1.0)
      throw ConfigError("tabulated filter: transmission outside [0,1]");
    f.peak = std::max(f.peak, f.table[i].second);
  }
  return f;
}

std::vector<double> SpectralFilter::discontinuities() const {
  switch (kind) {
    case Kind::top_hat:
      return {center - 0.5 * width, center + 0.5 * width};
    case Kind::long_pass:
    case Kind::short_pass:
      return {edge};
    case Kind::tabulated:
      return {table.front().first, table.back().first};
    case Kind::none:
      return {};
  }
  return {};
}

double filter_transmission(const SpectralFilter& f, double omega) {
  switch (f.kind) {
    case SpectralFilter::Kind::none:
      return 1.0;
    case SpectralFilter::Kind::top_hat:
      // closed passband edges
      return std::abs(omega - f.center) <= 0.5 * f.width ? f.peak : 0.0;
    case SpectralFilter::Kind::long_pass:
      return omega <= f.edge ? f.peak : 0.0;
    case SpectralFilter::Kind::short_pass:
      return omega >= f.edge ? f.peak : 0.0;
    case SpectralFilter::Kind::tabulated: {
      if (omega < f.table.front().first || omega > f.table.back().first) return 0.0;
      auto it = std::lower_bound(f.table.begin(), f.table.end(), omega,
                                 [](const auto& p, double w) { return p.first < w; });
      if (it == f.table.begin()) return it->second;
      const auto lo = *(it - 1);
      const auto hi = *it;
      const double t = (omega - lo.first) / (hi.first - lo.first);
      return lo.second + t * (hi.second - lo.second);
    }
  }
  return 0.0;
}

double bandwidth_nm_to_angular(double lambda_center_m, double delta_lambda_m) {
  return kTwoPiC * delta_lambda_m / (lambda_center_m * lambda_center_m);
}

double joint_spectral_rate(const SourceSetup& s, double omega_s) {
  const auto oc = overlap_constants(s.beams, s.geometry);
  const auto dk = phase_mismatch(s.geometry, s.crystal, omega_s);
  const double phi2 = std::norm(phi00(oc, dk, s.crystal.length));
  return s.beams.eta_signal * s.beams.eta_idler * rate_prefactor(s, omega_s) * phi2;
}

double singles_spectral_rate(const SourceSetup& s, Arm arm, double omega, int truncation,
                             ConvergenceDiag* diag) {
  const double omega_s = omega_signal_of(s, arm, omega);
  const double eta = arm == Arm::signal ? s.beams.eta_signal : s.beams.eta_idler;
  return eta * rate_prefactor(s, omega_s) * mode_sum(s, arm, omega_s, truncation, diag);
}

std::optional<double> second_branch_omega(const SourceSetup& s) {
  const DispersionSet& d = *s.crystal.dispersion;
  const double omega_p = s.geometry.omega_p;
  const double om_edge = std::max(omega_from_wavelength(d.valid_max()),
                                  omega_p - omega_from_wavelength(d.valid_min()));
  const double om_lo = om_edge * 1.0000001;
  const double om_hi = (omega_p - om_edge) * 0.9999999;
  if (!(om_hi > om_lo)) return std::nullopt;
  const int n_scan = 600;
  double prev_om = om_lo;
  double prev = phase_mismatch(s.geometry, s.crystal, prev_om).dk_z;
  std::optional<double> best;
  for (int i = 1; i <= n_scan; ++i) {
    const double om = om_lo + (om_hi - om_lo) * i / n_scan;
    const double cur = phase_mismatch(s.geometry, s.crystal, om).dk_z;
    if (prev * cur < 0.0) {
      // bisect
      double a = prev_om, b = om, fa = prev;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = phase_mismatch(s.geometry, s.crystal, mid).dk_z;
        if (fa * fm <= 0.0) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
      }
      const double root = 0.5 * (a + b);
      if (std::abs(root - s.geometry.omega_s0) > 1e-6 * omega_p) {
        if (!best || std::abs(root - s.geometry.omega_s0) < std::abs(*best - s.geometry.omega_s0))
          best = root;
      }
    }
    prev_om = om;
    prev = cur;
  }
  return best;
}

Band detect_band(const SourceSetup& s, Arm arm, int truncation) {
  const DispersionSet& d = *s.crystal.dispersion;
  const double omega_p = s.geometry.omega_p;
  const double carrier = arm == Arm::signal ? s.geometry.omega_s0 : s.geometry.omega_i0;

  // hard limits: both photons inside dispersion validity
  const double om_edge = std::max(omega_from_wavelength(d.valid_max()),
                                  omega_p - omega_from_wavelength(d.valid_min()));
  double lim_lo = om_edge * 1.0000001;
  double lim_hi = (omega_p - om_edge) * 0.9999999;

  // clamp at the midpoint toward a secondary phase-matching branch
  if (const auto second = second_branch_omega(s)) {
    const double here = omega_signal_of(s, arm, carrier);
    const double mid_signal = 0.5 * (here + *second);
    const double mid = omega_signal_of(s, arm, mid_signal);
    if (mid > carrier)
      lim_hi = std::min(lim_hi, mid);
    else
      lim_lo = std::max(lim_lo, mid);
  }

  auto density = [&](double om) { return singles_spectral_rate(s, arm, om, truncation); };
  const double peak = density(carrier);
  if (!(peak > 0.0)) throw SolverError("band detection: zero spectral density at the carrier");

  // coarse half-width estimate: expand until density < peak/2
  double hw = omega_p * 1e-5;
  while (carrier + hw < lim_hi && density(carrier + hw) > 0.5 * peak) hw *= 2.0;
  const double step = hw / 24.0;

  auto scan = [&](double dir, double limit) {
    double om = carrier;
    int below = 0;
    while ((dir > 0.0 ? om < limit : om > limit)) {
      om += dir * step;
      if (dir > 0.0 ? om >= limit : om <= limit) return limit;
      if (density(om) < kBandThreshold * peak) {
        if (++below >= 8) return om - dir * step * (below - 1);
      } else {
        below = 0;
      }
    }
    return limit;
  };

  Band band;
  band.lo = scan(-1.0, lim_lo);
  band.hi = scan(+1.0, lim_hi);
  return band;
}

IntegralResult total_joint_rate(const SourceSetup& s, const SpectralFilter& f_s,
                                const SpectralFilter& f_i, const RateOptions& opts) {
  const Band band = detect_band(s, Arm::signal, opts.truncation);
  const double omega_p = s.geometry.omega_p;
  auto integrand = [&](double om_s) {
    const double ts = filter_transmission(f_s, om_s);
    const double ti = filter_transmission(f_i, omega_p - om_s);
    if (ts == 0.0 || ti == 0.0) return 0.0;
    return ts * ti * joint_spectral_rate(s, om_s);
  };
  std::vector<double> knots = f_s.discontinuities();
  for (double e : f_i.discontinuities()) knots.push_back(omega_p - e);
  knots.erase(std::remove_if(knots.begin(), knots.end(),
                             [&](double k) { return k <= band.lo || k >= band.hi; }),
              knots.end());
  return adaptive_gk15_knotted(integrand, band.lo, band.hi, std::move(knots), opts.quad);
}

IntegralResult total_singles_rate(const SourceSetup& s, Arm arm, const SpectralFilter& f,
                                  const RateOptions& opts) {
  const Band band = detect_band(s, arm, opts.truncation);
  auto integrand = [&](double om) {
    const double t = filter_transmission(f, om);
    if (t == 0.0) return 0.0;
    return t * singles_spectral_rate(s, arm, om, opts.truncation);
  };
  std::vector<double> knots = f.discontinuities();
  knots.erase(std::remove_if(knots.begin(), knots.end(),
                             [&](double k) { return k <= band.lo || k >= band.hi; }),
              knots.end());
  return adaptive_gk15_knotted(integrand, band.lo, band.hi, std::move(knots), opts.quad);
}

RateReport heralding_efficiency(const SourceSetup& s, const SpectralFilter& f_s,
                                const SpectralFilter& f_i, const RateOptions& opts) {
  RateReport r;
  r.truncation = opts.truncation;
  const auto joint = total_joint_rate(s, f_s, f_i, opts);
  const auto sig = total_singles_rate(s, Arm::signal, f_s, opts);
  const auto idl = total_singles_rate(s, Arm::idler, f_i, opts);
  r.joint_rate = joint.value;
  r.joint_error = joint.error_bound;
  r.singles_rate_signal = sig.value;
  r.singles_error_signal = sig.error_bound;
  r.singles_rate_idler = idl.value;
  r.singles_error_idler = idl.error_bound;
  r.heralding = (sig.value > 0.0 && idl.value > 0.0)
                    ? joint.value / std::sqrt(sig.value * idl.value)
                    : 0.0;
  singles_spectral_rate(s, Arm::signal, s.geometry.omega_s0, opts.truncation, &r.mode_sum);
  r.second_branch = second_branch_omega(s);
  if (r.second_branch) {
    // reported separately; never added to the totals above
    SourceSetup alt = s;
    alt.geometry.omega_s0 = *r.second_branch;
    alt.geometry.omega_i0 = s.geometry.omega_p - *r.second_branch;
    try {
      r.second_branch_joint_rate = total_joint_rate(alt, f_s, f_i, opts).value;
    } catch (const std::exception&) {
      r.second_branch_joint_rate = 0.0;
    }
  }
  return r;
}

SpectralCurve sample_spectra(const SourceSetup& s, int n_points, int truncation) {
  if (n_points < 2) throw ConfigError("spectral curve needs at least 2 points");
  const Band bs = detect_band(s, Arm::signal, truncation);
  SpectralCurve c;
  c.omega.resize(n_points);
  c.joint.resize(n_points);
  c.singles_signal.resize(n_points);
  c.singles_idler.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double om = bs.lo + (bs.hi - bs.lo) * i / (n_points - 1);
    c.omega[i] = om;
    c.joint[i] = joint_spectral_rate(s, om);
    c.singles_signal[i] = singles_spectral_rate(s, Arm::signal, om, truncation);
    c.singles_idler[i] =
        singles_spectral_rate(s, Arm::idler, s.geometry.omega_p - om, truncation);
  }
  return c;
}

double curve_fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw ConfigError("curve_fwhm: bad curve");
  const auto it = std::max_element(y.begin(), y.end());
  const double half = 0.5 * *it;
  const std::size_t ipk = it - y.begin();
  double lo = x.front(), hi = x.back();
  for (std::size_t i = ipk; i-- > 0;) {
    if (y[i] <= half) {
      const double t = (half - y[i]) / (y[i + 1] - y[i]);
      lo = x[i] + t * (x[i + 1] - x[i]);
      break;
    }
  }
  for (std::size_t i = ipk; i + 1 < y.size(); ++i) {
    if (y[i + 1] <= half) {
      const double t = (y[i] - half) / (y[i] - y[i + 1]);
      hi = x[i] + t * (x[i + 1] - x[i]);
      break;
    }
  }
  return hi - lo;
}

}  // namespace spdc
