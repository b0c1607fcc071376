#include "spdc/overlap.hpp"

#include <cmath>
#include <vector>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

// exponent beyond which exp(-x) is reported as exact zero
constexpr double kUnderflowExponent = 700.0;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// Companion-mode parameters of the arm opposite to the detected one.  With the
// signal at -y and the idler at +y, the companion transverse coordinate is
//   y_c = y cos(th_c) + sz * z sin(th_c),   sz = -1 (idler), +1 (signal).
struct Companion {
  double waist;
  double theta;
  double z_sign;
};

Companion companion_of(Arm detected, const BeamConfig& beams, const Geometry& g) {
  if (detected == Arm::signal) return {beams.waist_idler, g.theta_i, -1.0};
  return {beams.waist_signal, g.theta_s, +1.0};
}

// E_j = int H_j(g_y y) exp(-C y^2 + i kappa y) dy, via the generating function
//   E_j = M0 j! sum_k tau^k beta^(j-2k) / (k! (j-2k)!),
// tau = (g_y^2 - C)/C, beta = i kappa g_y / C.
void hermite_phase_moments(int j_max, double g_y, double c, double kappa, double m0,
                           std::vector<cplx>& e) {
  const double tau = (g_y * g_y - c) / c;
  const cplx beta = kI * kappa * g_y / c;
  e.assign(j_max + 1, cplx{0.0, 0.0});
  for (int j = 0; j <= j_max; ++j) {
    cplx sum{0.0, 0.0};
    for (int k = 0; 2 * k <= j; ++k) {
      sum += std::pow(tau, k) * std::pow(beta, j - 2 * k) /
             (factorial(k) * factorial(j - 2 * k));
    }
    e[j] = m0 * factorial(j) * sum;
  }
}

}  // namespace

double BeamConfig::alpha_squared(double waist) const {
  return 2.0 / (kPi * waist * waist);
}

OverlapConstants overlap_constants(const BeamConfig& beams, const Geometry& g) {
  const double wp2 = beams.waist_pump * beams.waist_pump;
  const double ws2 = beams.waist_signal * beams.waist_signal;
  const double wi2 = beams.waist_idler * beams.waist_idler;
  const double cs = std::cos(g.theta_s), ci = std::cos(g.theta_i);
  OverlapConstants oc;
  oc.a = 1.0 / wp2 + 1.0 / ws2 + 1.0 / wi2;
  oc.c = 1.0 / wp2 + cs * cs / ws2 + ci * ci / wi2;
  oc.d = std::sin(2.0 * g.theta_s) / ws2 - std::sin(2.0 * g.theta_i) / wi2;
  return oc;
}

std::complex<double> phi00(const OverlapConstants& oc, const PhaseMismatch& dk, double length) {
  const double expo = dk.dk_y * dk.dk_y / (4.0 * oc.c);
  if (expo > kUnderflowExponent) return {0.0, 0.0};
  const double val = kPi * length / std::sqrt(oc.a * oc.c) * std::exp(-expo) *
                     sinc(0.5 * dk.dk_z * length);
  return {val, 0.0};
}

std::complex<double> z_moment_series(int q, double b, double length) {
  // sum_t (i b)^t / t! * int z^(q+t) dz, even powers only
  const double half = 0.5 * length;
  cplx total{0.0, 0.0};
  cplx bt{1.0, 0.0};  // (i b)^t / t!
  for (int t = 0; t < 64; ++t) {
    if ((q + t) % 2 == 0) {
      const int p = q + t;
      total += bt * (2.0 * std::pow(half, p + 1) / (p + 1));
    }
    bt *= kI * b / (t + 1.0);
    if (std::abs(bt) * std::pow(half, q + t + 2) < 1e-300) break;
  }
  return total;
}

std::complex<double> z_moment_direct(int q, double b, double length) {
  const double half = 0.5 * length;
  const double x = b * half;
  const cplx eih = std::exp(kI * x), emih = std::exp(-kI * x);
  cplx z = length * sinc(x);  // q = 0
  for (int qq = 1; qq <= q; ++qq) {
    const cplx boundary =
        (std::pow(half, qq) * eih - std::pow(-half, qq) * emih) / (kI * b);
    z = boundary - (static_cast<double>(qq) / (kI * b)) * z;
  }
  return z;
}

std::complex<double> z_moment(int q, double b, double length) {
  if (std::abs(b) * 0.5 * length < 1.0) return z_moment_series(q, b, length);
  return z_moment_direct(q, b, length);
}

std::complex<double> phi_nm(int n, int m, const OverlapConstants& oc, const BeamConfig& beams,
                            const Geometry& g, const PhaseMismatch& dk, double length,
                            Arm detected) {
  if (n < 0 || m < 0) throw ConfigError("phi_nm: mode orders must be non-negative");
  if (n % 2 == 1) return {0.0, 0.0};  // dk_x = 0 kills odd x modes
  if (n == 0 && m == 0) return phi00(oc, dk, length);

  const Companion comp = companion_of(detected, beams, g);
  const double expo = dk.dk_y * dk.dk_y / (4.0 * oc.c);
  if (expo > kUnderflowExponent) return {0.0, 0.0};

  // x integral: sqrt(pi/A) * n!/(n/2)! * (2/(A Wc^2) - 1)^(n/2)
  const double t = 2.0 / (oc.a * comp.waist * comp.waist) - 1.0;
  const double x_factor = std::sqrt(kPi / oc.a) * factorial(n) / factorial(n / 2) *
                          std::pow(t, n / 2);

  const double g_y = std::sqrt(2.0) * std::cos(comp.theta) / comp.waist;
  const double g_z = comp.z_sign * std::sqrt(2.0) * std::sin(comp.theta) / comp.waist;
  const double m0 = std::sqrt(kPi / oc.c) * std::exp(-expo);

  std::vector<cplx> e;
  hermite_phase_moments(m + 2, g_y, oc.c, dk.dk_y, m0, e);
  // F_j = int y H_j(g_y y) exp(-C y^2 + i kappa y) dy = (E_{j+1}/2 + j E_{j-1}) / g_y
  auto f_moment = [&](int j) {
    cplx v = 0.5 * e[j + 1];
    if (j >= 1) v += static_cast<double>(j) * e[j - 1];
    return v / g_y;
  };

  std::vector<cplx> z(m + 2);
  for (int q = 0; q <= m + 1; ++q) z[q] = z_moment(q, dk.dk_z, length);

  cplx yz{0.0, 0.0};
  for (int j = 0; j <= m; ++j) {
    const double coef = binomial(m, j) * std::pow(2.0 * g_z, m - j);
    yz += coef * (e[j] * z[m - j] - oc.d * f_moment(j) * z[m - j + 1]);
  }
  return x_factor * yz;
}

double focusing_ratio(const BeamConfig& beams) {
  if (beams.waist_signal != beams.waist_idler)
    throw ConfigError("focusing_ratio assumes equal signal and idler waists");
  const double r = beams.waist_pump / beams.waist_signal;
  return 1.0 / (1.0 + 2.0 * r * r);
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n / 2 + n % 2; ++i) {
    double xi = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      const double dx = p1 / pp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[i] = -xi;
    x[n - 1 - i] = xi;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * pp * pp);
  }
}

double hermite_eval(int n, double u) {
  if (n == 0) return 1.0;
  double h0 = 1.0, h1 = 2.0 * u;
  for (int k = 2; k <= n; ++k) {
    const double h2 = 2.0 * u * h1 - 2.0 * (k - 1) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

cplx oracle_pass(int n, int m, const OverlapConstants& oc, const Companion& comp,
                 const PhaseMismatch& dk, double length, double radius, bool with_coupling,
                 int n_tr, int n_z) {
  std::vector<double> xt, wt, xz, wz;
  gauss_legendre(n_tr, xt, wt);
  gauss_legendre(n_z, xz, wz);

  const double g_y = std::sqrt(2.0) * std::cos(comp.theta) / comp.waist;
  const double g_z = comp.z_sign * std::sqrt(2.0) * std::sin(comp.theta) / comp.waist;

  // x integral
  double ix = 0.0;
  for (int i = 0; i < n_tr; ++i) {
    const double x = xt[i] * radius;
    ix += wt[i] * radius * hermite_eval(n, std::sqrt(2.0) * x / comp.waist) *
          std::exp(-oc.a * x * x);
  }
  // y-z integral
  cplx iyz{0.0, 0.0};
  for (int i = 0; i < n_tr; ++i) {
    const double y = xt[i] * radius;
    const double wy = wt[i] * radius;
    const double gauss = std::exp(-oc.c * y * y);
    if (gauss == 0.0) continue;
    const cplx phase_y = std::exp(kI * dk.dk_y * y);
    cplx inner{0.0, 0.0};
    for (int j = 0; j < n_z; ++j) {
      const double z = xz[j] * 0.5 * length;
      const double wzj = wz[j] * 0.5 * length;
      const double env = with_coupling ? (1.0 - oc.d * y * z) : 1.0;
      inner += wzj * hermite_eval(m, g_y * y + g_z * z) * env * std::exp(kI * dk.dk_z * z);
    }
    iyz += wy * gauss * phase_y * inner;
  }
  return ix * iyz;
}

}  // namespace

std::complex<double> numeric_overlap_oracle(int n, int m, const OverlapConstants& oc,
                                            const BeamConfig& beams, const Geometry& g,
                                            const PhaseMismatch& dk, double length,
                                            Arm detected, const QuadratureSpec& spec) {
  if (spec.radius_factor < 5.0)
    throw ConfigError("oracle truncation radius must be at least 5 waists");
  const Companion comp = companion_of(detected, beams, g);
  const double radius =
      spec.radius_factor *
      std::max({beams.waist_pump, beams.waist_signal, beams.waist_idler});
  const bool with_coupling = !(n == 0 && m == 0);
  // magnitude scale for the relative-convergence test
  const double scale = kPi * length / std::sqrt(oc.a * oc.c);

  int n_tr = spec.nodes_transverse, n_z = spec.nodes_z;
  cplx last = oracle_pass(n, m, oc, comp, dk, length, radius, with_coupling, n_tr, n_z);
  cplx second_last = last;
  for (int d = 0; d < spec.max_doublings; ++d) {
    n_tr *= 2;
    n_z *= 2;
    second_last = last;
    last = oracle_pass(n, m, oc, comp, dk, length, radius, with_coupling, n_tr, n_z);
    const double change = std::abs(last - second_last);
    if (change <= spec.rel_tol * std::max(std::abs(last), 1e-9 * scale)) return last;
  }
  throw QuadratureError(
      "overlap oracle did not converge under node doubling; last estimates " +
          std::to_string(std::abs(second_last)) + ", " + std::to_string(std::abs(last)),
      std::abs(last), std::abs(last - second_last));
}

}  // namespace spdc
