#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"
#include "spdc/overlap.hpp"

using namespace spdc;

namespace {

const DispersionSet& bibo() {
  static DispersionSet d =
      DispersionSet::from_file(std::string(SPDC_DATA_DIR) + "/bibo.dispersion");
  return d;
}

CrystalParams crystal() {
  CrystalParams c;
  c.dispersion = &bibo();
  return c;
}

BeamConfig loose() { return {}; }

Geometry fig3_geometry() {
  GeometryConstraint gc;
  gc.exterior_angle = deg_to_rad(3.04);
  return solve_geometry(Preset::noncollinear_degenerate, crystal(), 355e-9, {}, gc).geometry;
}

Geometry fig5_geometry() {
  GeometryConstraint gc;
  gc.theta_p = deg_to_rad(142.44);
  return solve_geometry(Preset::noncollinear_nondegenerate, crystal(), 355e-9, 850e-9, gc)
      .geometry;
}

double rel_diff(std::complex<double> a, std::complex<double> b) {
  const double den = std::max(std::abs(a), std::abs(b));
  return den == 0.0 ? 0.0 : std::abs(a - b) / den;
}

}  // namespace

TEST_CASE("overlap constants") {
  SUBCASE("symmetric collinear waists give A = C, D = 0") {
    BeamConfig b;
    b.waist_pump = b.waist_signal = b.waist_idler = 100e-6;
    Geometry g;  // all angles zero
    const auto oc = overlap_constants(b, g);
    CHECK(oc.a == doctest::Approx(3e8).epsilon(1e-12));
    CHECK(oc.c == doctest::Approx(3e8).epsilon(1e-12));
    CHECK(oc.d == 0.0);
  }
  SUBCASE("degenerate symmetric geometry has D = 0") {
    const auto oc = overlap_constants(loose(), fig3_geometry());
    CHECK(std::abs(oc.d) < 1e-6 * oc.c);
    CHECK(oc.a >= oc.c);
    CHECK(oc.c > 0.0);
  }
  SUBCASE("asymmetric-angle geometry pins D against the hand-evaluated value") {
    Geometry g;
    g.theta_s = deg_to_rad(3.05);
    g.theta_i = deg_to_rad(2.17);
    const auto oc = overlap_constants(loose(), g);
    CHECK(oc.d == doctest::Approx(3058919.62850382).epsilon(1e-12));
    CHECK(oc.a >= oc.c);
  }
}

TEST_CASE("phi00 closed form") {
  OverlapConstants oc{3e8, 2.9e8, 0.0};
  const double length = 600e-6;
  const double peak = kPi * length / std::sqrt(oc.a * oc.c);

  CHECK(phi00(oc, {0.0, 0.0}, length).real() == doctest::Approx(peak).epsilon(1e-14));
  CHECK(phi00(oc, {0.0, 0.0}, length).imag() == 0.0);

  // first sinc null at dk_z L/2 = pi
  const double dkz_null = 2.0 * kPi / length;
  CHECK(std::abs(phi00(oc, {0.0, dkz_null}, length).real()) < 1e-25);

  // exponential transverse factor: |Phi|^2 = e^-1 peak^2 at dk_y = sqrt(2C),
  // e^-2 peak^2 at dk_y = 2 sqrt(C)
  const double p2 = peak * peak;
  CHECK(std::norm(phi00(oc, {std::sqrt(2.0 * oc.c), 0.0}, length)) ==
        doctest::Approx(p2 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(std::norm(phi00(oc, {2.0 * std::sqrt(oc.c), 0.0}, length)) ==
        doctest::Approx(p2 * std::exp(-2.0)).epsilon(1e-12));

  // far tail underflows to exact zero
  CHECK(phi00(oc, {1e7, 0.0}, length) == std::complex<double>{0.0, 0.0});
}

TEST_CASE("phi_nm base case and parity") {
  const auto g = fig3_geometry();
  const auto b = loose();
  const auto oc = overlap_constants(b, g);
  const PhaseMismatch dk{9e3, 4e3};
  const double length = 600e-6;

  CHECK(phi_nm(0, 0, oc, b, g, dk, length, Arm::signal) == phi00(oc, dk, length));
  for (int n : {1, 3, 5, 7, 9}) {
    for (int m : {0, 2, 4}) {
      CHECK(phi_nm(n, m, oc, b, g, dk, length, Arm::signal) ==
            std::complex<double>{0.0, 0.0});
      CHECK(phi_nm(n, m, oc, b, g, dk, length, Arm::idler) ==
            std::complex<double>{0.0, 0.0});
    }
  }
  CHECK_THROWS_AS(phi_nm(-1, 0, oc, b, g, dk, length, Arm::signal), ConfigError);
}

TEST_CASE("phi_01 vanishes for the collinear symmetric configuration") {
  BeamConfig b;
  b.waist_signal = b.waist_idler = 100e-6;
  Geometry g;  // collinear, D = 0
  const auto oc = overlap_constants(b, g);
  const auto v = phi_nm(0, 1, oc, b, g, {0.0, 3e3}, 600e-6, Arm::signal);
  CHECK(std::abs(v) < 1e-30);
}

TEST_CASE("phi_20 prefactor changes sign across 2 = A Wc^2") {
  Geometry g;  // collinear
  const double length = 600e-6;
  const PhaseMismatch dk{0.0, 1e3};

  BeamConfig tight_companion;  // A Wi^2 < 2
  tight_companion.waist_pump = 500e-6;
  tight_companion.waist_signal = 200e-6;
  tight_companion.waist_idler = 50e-6;
  const auto oc1 = overlap_constants(tight_companion, g);
  CHECK(2.0 / (oc1.a * 50e-6 * 50e-6) > 1.0);
  const auto v1 = phi_nm(2, 0, oc1, tight_companion, g, dk, length, Arm::signal);

  BeamConfig loose_companion;  // A Wi^2 > 2
  loose_companion.waist_pump = 100e-6;
  loose_companion.waist_signal = 100e-6;
  loose_companion.waist_idler = 100e-6;
  const auto oc2 = overlap_constants(loose_companion, g);
  CHECK(2.0 / (oc2.a * 100e-6 * 100e-6) < 1.0);
  const auto v2 = phi_nm(2, 0, oc2, loose_companion, g, dk, length, Arm::signal);

  CHECK(v1.real() * v2.real() < 0.0);
}

TEST_CASE("z moment series and closed form agree at the switchover") {
  const double length = 600e-6;
  // continuity at the |dk_z L| = 1e-3 boundary used for the removable singularity
  const double b = 1e-3 / length;
  for (int q = 0; q <= 12; ++q) {
    const auto s = z_moment_series(q, b, length);
    const auto d = z_moment_direct(q, b, length);
    const double scale = std::pow(0.5 * length, q + 1) * length;
    CHECK(std::abs(s - d) / scale < 1e-9);
  }
  // frozen quadrature goldens at b L/2 = 0.7
  const double b7 = 1.4 / length;
  CHECK(z_moment(0, b7, length).real() == doctest::Approx(0.000552186589060878).epsilon(1e-12));
  CHECK(z_moment(1, b7, length).imag() == doctest::Approx(3.99776900100793e-8).epsilon(1e-12));
  CHECK(z_moment(2, b7, length).real() == doctest::Approx(1.54302015782682e-11).epsilon(1e-12));
  CHECK(z_moment(3, b7, length).imag() == doctest::Approx(2.13819712347525e-15).epsilon(1e-12));
  CHECK(z_moment(1, b7, length).real() == doctest::Approx(0.0));
  // zero-mismatch limits: plain power integrals
  CHECK(z_moment(0, 0.0, length).real() == doctest::Approx(length).epsilon(1e-15));
  CHECK(z_moment(2, 0.0, length).real() ==
        doctest::Approx(std::pow(length, 3) / 12.0).epsilon(1e-15));
  CHECK(std::abs(z_moment(1, 0.0, length)) == 0.0);
}

TEST_CASE("phi_nm is continuous across the z-moment evaluation switch") {
  const auto g = fig3_geometry();
  const auto b = loose();
  const auto oc = overlap_constants(b, g);
  const double length = 600e-6;
  const double b_switch = 2.0 / length;  // |b| L/2 = 1
  for (int m : {1, 2, 5}) {
    const auto lo = phi_nm(0, m, oc, b, g, {5e3, b_switch * (1.0 - 1e-9)}, length, Arm::signal);
    const auto hi = phi_nm(0, m, oc, b, g, {5e3, b_switch * (1.0 + 1e-9)}, length, Arm::signal);
    CHECK(rel_diff(lo, hi) < 1e-7);
  }
}

TEST_CASE("oracle matches phi00 and the low-order closed forms on the reference grids") {
  const auto b = loose();
  const double length = 600e-6;
  QuadratureSpec spec;
  spec.rel_tol = 1e-9;

  auto run_grid = [&](const Geometry& g, double detuning_span, int points) {
    const auto c = crystal();
    const auto oc = overlap_constants(b, g);
    for (int i = 0; i < points; ++i) {
      const double detuning = -detuning_span + 2.0 * detuning_span * i / (points - 1);
      const auto dk = phase_mismatch(g, c, g.omega_s0 + detuning);
      const auto o00 = numeric_overlap_oracle(0, 0, oc, b, g, dk, length, Arm::signal, spec);
      CHECK(rel_diff(o00, phi00(oc, dk, length)) < 1e-6);
      const auto o01 = numeric_overlap_oracle(0, 1, oc, b, g, dk, length, Arm::signal, spec);
      CHECK(rel_diff(o01, phi_nm(0, 1, oc, b, g, dk, length, Arm::signal)) < 1e-6);
      const auto o20 = numeric_overlap_oracle(2, 0, oc, b, g, dk, length, Arm::signal, spec);
      CHECK(rel_diff(o20, phi_nm(2, 0, oc, b, g, dk, length, Arm::signal)) < 1e-6);
    }
  };
  run_grid(fig3_geometry(), 1.0e14, 10);
  run_grid(fig5_geometry(), 5.0e13, 10);
}

TEST_CASE("oracle matches higher-order modes and the idler arm") {
  const auto b = loose();
  const auto g = fig5_geometry();
  const auto c = crystal();
  const auto oc = overlap_constants(b, g);
  const double length = 600e-6;
  QuadratureSpec spec;
  spec.rel_tol = 1e-9;
  const auto dk = phase_mismatch(g, c, g.omega_s0 + 2.5e13);
  for (auto [n, m] : {std::pair{2, 3}, {4, 2}, {0, 7}}) {
    for (Arm arm : {Arm::signal, Arm::idler}) {
      const auto oracle = numeric_overlap_oracle(n, m, oc, b, g, dk, length, arm, spec);
      const auto closed = phi_nm(n, m, oc, b, g, dk, length, arm);
      CHECK(rel_diff(oracle, closed) < 1e-6);
    }
  }
}

TEST_CASE("oracle rejects too-small truncation radii") {
  const auto b = loose();
  const auto g = fig3_geometry();
  const auto oc = overlap_constants(b, g);
  QuadratureSpec spec;
  spec.radius_factor = 3.0;
  CHECK_THROWS_AS(
      numeric_overlap_oracle(0, 0, oc, b, g, {0.0, 0.0}, 600e-6, Arm::signal, spec),
      ConfigError);
}

TEST_CASE("mode magnitudes decay with total order in the reference band") {
  const auto b = loose();
  const auto g = fig3_geometry();
  const auto c = crystal();
  const auto oc = overlap_constants(b, g);
  const auto dk = phase_mismatch(g, c, g.omega_s0 + 2e13);

  auto order_weight = [&](int order) {
    double w = 0.0;
    for (int n = 0; n <= order; n += 2) {
      const int m = order - n;
      const auto phi = phi_nm(n, m, oc, b, g, dk, 600e-6, Arm::signal);
      double fact = 1.0;
      for (int i = 2; i <= n; ++i) fact *= i;
      for (int i = 2; i <= m; ++i) fact *= i;
      w += std::norm(phi) / (std::ldexp(1.0, n + m) * fact);
    }
    return w;
  };
  double prev = order_weight(6);
  for (int order : {8, 10, 12, 14}) {
    const double cur = order_weight(order);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("swapping arms leaves the degenerate symmetric magnitudes unchanged") {
  const auto b = loose();
  const auto g = fig3_geometry();
  const auto c = crystal();
  const auto oc = overlap_constants(b, g);
  const auto dk = phase_mismatch(g, c, g.omega_s0 + 1.7e13);
  for (auto [n, m] : {std::pair{0, 0}, {0, 1}, {2, 0}, {2, 3}, {0, 6}}) {
    const double s = std::abs(phi_nm(n, m, oc, b, g, dk, 600e-6, Arm::signal));
    const double i = std::abs(phi_nm(n, m, oc, b, g, dk, 600e-6, Arm::idler));
    CHECK(s == doctest::Approx(i).epsilon(1e-10));
  }
}

TEST_CASE("collinear symmetric phi_20 tracks phi00 across the band") {
  // identical sinc dependence: the ratio is frequency independent
  const auto c = crystal();
  const auto g = solve_geometry(Preset::collinear_degenerate, c, 355e-9, {}, {}).geometry;
  BeamConfig b;
  const auto oc = overlap_constants(b, g);
  double ratio0 = 0.0;
  bool first = true;
  for (double detuning : {1e13, 5e13, 1.2e14, 2.1e14}) {
    const auto dk = phase_mismatch(g, c, g.omega_s0 + detuning);
    const auto top = phi_nm(2, 0, oc, b, g, dk, 600e-6, Arm::signal);
    const auto bot = phi00(oc, dk, 600e-6);
    const double r = top.real() / bot.real();
    if (first) {
      ratio0 = r;
      first = false;
    } else {
      CHECK(r == doctest::Approx(ratio0).epsilon(1e-10));
    }
  }
}

TEST_CASE("focusing ratio") {
  BeamConfig b;
  b.waist_pump = 100e-6;
  b.waist_signal = b.waist_idler = 100e-6;
  CHECK(focusing_ratio(b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  b.waist_pump = 250e-6;
  CHECK(focusing_ratio(b) == doctest::Approx(1.0 / 13.5).epsilon(1e-15));
  b.waist_pump = 100e-3;  // pump far looser than the targets
  CHECK(focusing_ratio(b) < 1e-5);
  b.waist_idler = 95e-6;
  CHECK_THROWS_AS(focusing_ratio(b), ConfigError);
}
