#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"
#include "spdc/geometry.hpp"

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

constexpr double kLambdaP = 355e-9;

// goldens from an independent mpmath solve of the same carrier conditions
constexpr double kThetaPCold = 142.228243619;    // deg
constexpr double kThetaPNcd = 141.891071997;     // deg, exterior target 3.04 deg
constexpr double kThetaSNcd = 1.643971629;       // deg
constexpr double kThetaPColnd = 143.223716478;   // deg
constexpr double kThetaSNcnd = 2.9659747;        // deg, theta_p = 142.44 deg
constexpr double kThetaINcnd = 2.1049161;
constexpr double kThetaSExtNcnd = 5.4588038;
constexpr double kThetaIExtNcnd = 3.9120185;

void check_residuals(const SolveResult& r, const CrystalParams& c) {
  CHECK(std::abs(r.residual_dk_y) * c.length < 1e-6);
  CHECK(std::abs(r.residual_dk_z) * c.length < 1e-6);
}

}  // namespace

TEST_CASE("collinear degenerate tilt") {
  const auto c = crystal();
  const auto r = solve_geometry(Preset::collinear_degenerate, c, kLambdaP, {}, {});
  CHECK(rad_to_deg(r.geometry.theta_p) == doctest::Approx(kThetaPCold).epsilon(1e-9));
  CHECK(std::abs(rad_to_deg(r.geometry.theta_p) - 142.0) < 0.3);
  CHECK(r.geometry.theta_s == 0.0);
  CHECK(r.geometry.theta_i == 0.0);
  CHECK(r.geometry.degenerate);
  check_residuals(r, c);
}

TEST_CASE("noncollinear degenerate at a 3.04 degree exterior target") {
  const auto c = crystal();
  GeometryConstraint gc;
  gc.exterior_angle = deg_to_rad(3.04);
  const auto r = solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, gc);
  const auto& g = r.geometry;
  CHECK(rad_to_deg(g.theta_p) == doctest::Approx(kThetaPNcd).epsilon(1e-9));
  CHECK(rad_to_deg(g.theta_s) == doctest::Approx(kThetaSNcd).epsilon(1e-7));
  // quoted reference angles, wide tolerance absorbing the coefficient set
  CHECK(std::abs(rad_to_deg(g.theta_p) - 141.9) < 0.3);
  CHECK(std::abs(rad_to_deg(g.theta_s) - 1.64) < 0.3);
  CHECK(std::abs(rad_to_deg(g.theta_s_ext) - 3.04) < 1e-9);  // target is met exactly
  check_residuals(r, c);

  SUBCASE("degenerate symmetry is exact") {
    CHECK(std::abs(g.theta_s - g.theta_i) < 1e-12);
    CHECK(std::abs(g.theta_s_ext - g.theta_i_ext) < 1e-12);
    CHECK(std::abs(g.omega_s0 - g.omega_i0) / g.omega_p < 1e-12);
  }
  SUBCASE("energy conservation") {
    CHECK(std::abs(g.omega_s0 + g.omega_i0 - g.omega_p) / g.omega_p < 1e-12);
  }
}

TEST_CASE("noncollinear degenerate at a fixed tilt recovers the same cone") {
  const auto c = crystal();
  GeometryConstraint by_angle;
  by_angle.exterior_angle = deg_to_rad(3.04);
  const auto a = solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, by_angle);
  GeometryConstraint by_tilt;
  by_tilt.theta_p = a.geometry.theta_p;
  const auto b = solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, by_tilt);
  CHECK(b.geometry.theta_s == doctest::Approx(a.geometry.theta_s).epsilon(1e-10));
  CHECK(rad_to_deg(b.geometry.theta_s_ext) == doctest::Approx(3.04).epsilon(1e-9));
}

TEST_CASE("collinear nondegenerate 850 nm tilt") {
  const auto c = crystal();
  const auto r =
      solve_geometry(Preset::collinear_nondegenerate, c, kLambdaP, 850e-9, {});
  CHECK(rad_to_deg(r.geometry.theta_p) == doctest::Approx(kThetaPColnd).epsilon(1e-9));
  CHECK(std::abs(rad_to_deg(r.geometry.theta_p) - 143.22) < 0.3);
  CHECK(wavelength_from_omega(r.geometry.omega_i0) * 1e9 ==
        doctest::Approx(609.5959596).epsilon(1e-8));
  check_residuals(r, c);
}

TEST_CASE("noncollinear nondegenerate at the reference tilt") {
  const auto c = crystal();
  GeometryConstraint gc;
  gc.theta_p = deg_to_rad(142.44);
  const auto r =
      solve_geometry(Preset::noncollinear_nondegenerate, c, kLambdaP, 850e-9, gc);
  const auto& g = r.geometry;
  CHECK(rad_to_deg(g.theta_s) == doctest::Approx(kThetaSNcnd).epsilon(1e-6));
  CHECK(rad_to_deg(g.theta_i) == doctest::Approx(kThetaINcnd).epsilon(1e-6));
  CHECK(rad_to_deg(g.theta_s_ext) == doctest::Approx(kThetaSExtNcnd).epsilon(1e-6));
  CHECK(rad_to_deg(g.theta_i_ext) == doctest::Approx(kThetaIExtNcnd).epsilon(1e-6));
  // quoted reference set, within the coefficient-set slack
  CHECK(std::abs(rad_to_deg(g.theta_s) - 3.05) < 0.3);
  CHECK(std::abs(rad_to_deg(g.theta_i) - 2.17) < 0.3);
  CHECK(std::abs(rad_to_deg(g.theta_s_ext) - 5.62) < 0.3);
  CHECK(std::abs(rad_to_deg(g.theta_i_ext) - 4.02) < 0.3);
  check_residuals(r, c);
}

TEST_CASE("solver reports unreachable targets with the bracket") {
  const auto c = crystal();
  GeometryConstraint gc;
  gc.exterior_angle = deg_to_rad(45.0);
  CHECK_THROWS_AS(solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, gc),
                  SolverError);
}

TEST_CASE("constraint validation") {
  const auto c = crystal();
  GeometryConstraint both;
  both.theta_p = deg_to_rad(142.0);
  both.exterior_angle = deg_to_rad(3.0);
  CHECK_THROWS_AS(solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, both),
                  ConfigError);
  CHECK_THROWS_AS(solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, {}),
                  ConfigError);
  CHECK_THROWS_AS(solve_geometry(Preset::collinear_nondegenerate, c, kLambdaP, {}, {}),
                  ConfigError);
}

TEST_CASE("phase mismatch vanishes at the carrier and dk_y is zero collinear") {
  const auto c = crystal();
  const auto cold = solve_geometry(Preset::collinear_degenerate, c, kLambdaP, {}, {}).geometry;
  for (double detuning : {-3e13, 0.0, 2e13, 3.73e13}) {
    CHECK(phase_mismatch(cold, c, cold.omega_s0 + detuning).dk_y == 0.0);
  }
  GeometryConstraint gc;
  gc.exterior_angle = deg_to_rad(3.04);
  const auto ncd =
      solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, gc).geometry;
  const auto at_carrier = phase_mismatch(ncd, c, ncd.omega_s0);
  CHECK(std::abs(at_carrier.dk_y) * c.length < 1e-6);
  CHECK(std::abs(at_carrier.dk_z) * c.length < 1e-6);
}

TEST_CASE("phase mismatch propagates dispersion range errors") {
  const auto c = crystal();
  const auto g = solve_geometry(Preset::collinear_degenerate, c, kLambdaP, {}, {}).geometry;
  CHECK_THROWS_AS(phase_mismatch(g, c, omega_from_wavelength(300e-9)), std::domain_error);
  CHECK_THROWS_AS(phase_mismatch(g, c, -1.0), std::domain_error);
}

TEST_CASE("degenerate Taylor expansion") {
  const auto c = crystal();
  GeometryConstraint gc;
  gc.exterior_angle = deg_to_rad(3.04);
  const auto g = solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, gc).geometry;

  SUBCASE("vanishes at the degenerate carrier") {
    const auto m = taylor_mismatch_degenerate(g, c, 0.5 * g.omega_p);
    CHECK(m.dk_y == 0.0);
    CHECK(m.dk_z == 0.0);
  }

  SUBCASE("dk_y slope matches 2 n_g sin(theta)/c at small detuning") {
    const auto s = c.dispersion->sample(710e-9, g.theta_p, Polarization::spdc);
    const double slope = 2.0 * s.n_group * std::sin(g.theta_s) / kSpeedOfLight;
    const double detuning = 1e12;
    const auto exact = phase_mismatch(g, c, g.omega_s0 + detuning);
    CHECK(exact.dk_y == doctest::Approx(slope * detuning).epsilon(1e-5));
    const auto taylor = taylor_mismatch_degenerate(g, c, g.omega_s0 + detuning);
    CHECK(taylor.dk_y == doctest::Approx(slope * detuning).epsilon(1e-12));
  }

  SUBCASE("dk_z parabola keeps one sign") {
    for (double detuning = 1e12; detuning < 4e14; detuning *= 2.0) {
      CHECK(taylor_mismatch_degenerate(g, c, g.omega_s0 + detuning).dk_z < 0.0);
      CHECK(taylor_mismatch_degenerate(g, c, g.omega_s0 - detuning).dk_z < 0.0);
    }
  }

  SUBCASE("rejects nondegenerate geometry") {
    const auto nd =
        solve_geometry(Preset::collinear_nondegenerate, c, kLambdaP, 850e-9, {}).geometry;
    CHECK_THROWS_AS(taylor_mismatch_degenerate(nd, c, nd.omega_s0), ConfigError);
  }
}

TEST_CASE("collinear degenerate Taylor dk_z within 5 percent at the reference detuning") {
  const auto c = crystal();
  const auto g = solve_geometry(Preset::collinear_degenerate, c, kLambdaP, {}, {}).geometry;
  const double detuning = 3.73e13;
  const auto exact = phase_mismatch(g, c, g.omega_s0 + detuning);
  const auto taylor = taylor_mismatch_degenerate(g, c, g.omega_s0 + detuning);
  CHECK(std::abs(taylor.dk_z - exact.dk_z) / std::abs(exact.dk_z) < 0.05);
}

TEST_CASE("Taylor residuals shrink at cubic order or faster") {
  const auto c = crystal();
  GeometryConstraint gc;
  gc.exterior_angle = deg_to_rad(3.04);
  const auto g = solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, gc).geometry;

  auto slope_fit = [&](auto residual) {
    // log-log fit of |residual| over two decades of detuning
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double detuning = 3e12; detuning <= 3.1e14; detuning *= 1.5) {
      const double r = std::abs(residual(detuning));
      if (r <= 0.0) continue;
      const double x = std::log(detuning), y = std::log(r);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };

  const double slope_y = slope_fit([&](double det) {
    return phase_mismatch(g, c, g.omega_s0 + det).dk_y -
           taylor_mismatch_degenerate(g, c, g.omega_s0 + det).dk_y;
  });
  const double slope_z = slope_fit([&](double det) {
    return phase_mismatch(g, c, g.omega_s0 + det).dk_z -
           taylor_mismatch_degenerate(g, c, g.omega_s0 + det).dk_z;
  });
  CHECK(slope_y >= 2.8);
  CHECK(slope_z >= 2.8);
}

TEST_CASE("Snell refraction at the crystal face") {
  CHECK(rad_to_deg(exterior_angle(deg_to_rad(1.64), 1.853)) == doctest::Approx(3.04).epsilon(2e-3));
  CHECK(exterior_angle(0.0, 1.85) == 0.0);
  for (double th : {0.01, 0.03, 0.09}) {
    CHECK(interior_angle(exterior_angle(th, 1.8486), 1.8486) ==
          doctest::Approx(th).epsilon(1e-12));
  }
  CHECK_THROWS_AS(exterior_angle(0.7, 1.85), std::domain_error);  // n sin > 1
}

TEST_CASE("emission angle curve: two crossings at a 143 degree tilt") {
  const auto c = crystal();
  const double target = deg_to_rad(3.04);
  const auto curve =
      emission_angle_curve(deg_to_rad(143.0), c, kLambdaP, 520e-9, 1100e-9, 581);

  int crossings = 0;
  bool have_prev = false;
  double prev = 0.0;
  for (const auto& s : curve) {
    if (s.branches.empty()) {
      have_prev = false;
      continue;
    }
    const double v = s.branches.front() - target;
    if (have_prev && prev * v < 0.0) ++crossings;
    prev = v;
    have_prev = true;
  }
  CHECK(crossings == 2);

  SUBCASE("branches vary continuously") {
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
      if (curve[i - 1].branches.empty() || curve[i].branches.empty() ||
          curve[i + 1].branches.empty())
        continue;
      const double d1 = std::abs(curve[i].branches.front() - curve[i - 1].branches.front());
      const double d2 = std::abs(curve[i + 1].branches.front() - curve[i].branches.front());
      // adjacent steps bounded by 10x the local derivative estimate
      CHECK(d2 < 10.0 * std::max(d1, 1e-6));
    }
  }
}

TEST_CASE("collinear wavelength pair is frequency conjugate") {
  const auto c = crystal();
  const auto pair = collinear_wavelengths(deg_to_rad(143.0), c, kLambdaP);
  REQUIRE(pair.size() == 2);
  const double sum = 1.0 / pair[0] + 1.0 / pair[1];
  CHECK(sum == doctest::Approx(1.0 / kLambdaP).epsilon(1e-6));
}

TEST_CASE("degenerate tilt touches the target angle tangentially") {
  const auto c = crystal();
  GeometryConstraint gc;
  gc.exterior_angle = deg_to_rad(3.04);
  const auto g = solve_geometry(Preset::noncollinear_degenerate, c, kLambdaP, {}, gc).geometry;
  const auto curve =
      emission_angle_curve(g.theta_p, c, kLambdaP, 660e-9, 770e-9, 441);

  double min_angle = 1e9;
  double min_lambda = 0.0;
  auto count_crossings = [&](double level) {
    int crossings = 0;
    bool have_prev = false;
    double prev = 0.0;
    for (const auto& s : curve) {
      if (s.branches.empty()) {
        have_prev = false;
        continue;
      }
      const double v = s.branches.front() - level;
      if (s.branches.front() < min_angle) {
        min_angle = s.branches.front();
        min_lambda = s.lambda;
      }
      if (have_prev && prev * v < 0.0) ++crossings;
      prev = v;
      have_prev = true;
    }
    return crossings;
  };
  // double root: two crossings just above the target, none just below
  CHECK(count_crossings(deg_to_rad(3.04) + 1e-6) == 2);
  CHECK(count_crossings(deg_to_rad(3.04) - 1e-6) == 0);
  CHECK(std::abs(min_angle - deg_to_rad(3.04)) < 1e-6);
  CHECK(std::abs(min_lambda - 710e-9) < 0.3e-9);
}
