#pragma once

#include <functional>
#include <vector>

namespace spdc {

struct IntegralResult {
  double value = 0.0;
  double error_bound = 0.0;  // accumulated error estimate
};

struct QuadratureOptions {
  double rel_tol = 1e-7;
  double abs_tol = 0.0;  // 0: derived from the first whole-interval estimate
  int max_depth = 48;
};

/// Adaptive Gauss-Kronrod 15(7) quadrature over [a, b].  Throws QuadratureError
/// when the subdivision depth is exhausted with the tolerance unmet.
IntegralResult adaptive_gk15(const std::function<double(double)>& f, double a, double b,
                             const QuadratureOptions& opts = {});

/// Same, with the interval pre-split at the given interior knots (filter edges,
/// band boundaries) so discontinuities land on subinterval ends.
IntegralResult adaptive_gk15_knotted(const std::function<double(double)>& f, double a, double b,
                                     std::vector<double> knots,
                                     const QuadratureOptions& opts = {});

}  // namespace spdc
