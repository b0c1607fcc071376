#include "spdc/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

struct RuleResult {
  double kronrod;
  double err;
};

RuleResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double result_g = fc * kWg[3];
  double result_k = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    result_k += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) result_g += kWg[j / 2] * (f1 + f2);
  }
  result_g *= h;
  result_k *= h;
  // |K - G| is a conservative bound for the Kronrod error on smooth integrands
  return {result_k, std::abs(result_k - result_g)};
}

void integrate_interval(const std::function<double(double)>& f, double a, double b,
                        double tol_per_unit, int depth, int max_depth, IntegralResult& out) {
  const auto r = gk15(f, a, b);
  const double local_tol = tol_per_unit * (b - a);
  if (r.err <= local_tol || r.err <= 1e-300) {
    out.value += r.kronrod;
    out.error_bound += r.err;
    return;
  }
  if (depth >= max_depth) {
    throw QuadratureError("adaptive quadrature: subdivision limit reached", out.value + r.kronrod,
                          out.error_bound + r.err);
  }
  const double mid = 0.5 * (a + b);
  integrate_interval(f, a, mid, tol_per_unit, depth + 1, max_depth, out);
  integrate_interval(f, mid, b, tol_per_unit, depth + 1, max_depth, out);
}

}  // namespace

IntegralResult adaptive_gk15(const std::function<double(double)>& f, double a, double b,
                             const QuadratureOptions& opts) {
  return adaptive_gk15_knotted(f, a, b, {}, opts);
}

IntegralResult adaptive_gk15_knotted(const std::function<double(double)>& f, double a, double b,
                                     std::vector<double> knots, const QuadratureOptions& opts) {
  if (!(b > a)) return {};
  knots.push_back(a);
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // first pass for the tolerance scale
  double coarse = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i] < a || knots[i + 1] > b) continue;
    coarse += std::abs(gk15(f, knots[i], knots[i + 1]).kronrod);
  }
  const double abs_tol =
      opts.abs_tol > 0.0 ? opts.abs_tol : std::max(coarse * opts.rel_tol, 1e-300);
  const double tol_per_unit = abs_tol / (b - a);

  IntegralResult out;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i] < a || knots[i + 1] > b) continue;
    integrate_interval(f, knots[i], knots[i + 1], tol_per_unit, 0, opts.max_depth, out);
  }
  return out;
}

}  // namespace spdc
