#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace secord {

using ScalarFn = std::function<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // magnitude of the summed Richardson corrections
  bool converged = true;
  std::size_t evaluations = 0;
};

/// Adaptive Simpson with Richardson correction on [a, b] (b < a integrates
/// backwards). `tol` is absolute; a relative floor of a few ulps of the
/// running estimate stops refinement that rounding cannot improve.
QuadratureResult adaptive_simpson(const ScalarFn& f, double a, double b,
                                  double tol = 1e-10, int max_depth = 40);

/// Integral from a singular endpoint `singular` to `other`, formed by
/// geometric shrinking toward the endpoint. Throws DivergentIntegral when the
/// dyadic contributions stop contracting before the tail estimate drops
/// below `tol`.
QuadratureResult improper_integral(const ScalarFn& f, double singular, double other,
                                   double tol = 1e-10);

/// Root of a monotone f on [lo, hi] by Newton steps safeguarded with
/// bisection. Requires f(lo), f(hi) of opposite sign (or one zero); throws
/// NoRootInBracket otherwise. Stops when |f| <= ftol or the bracket is
/// narrower than xtol.
double solve_bracketed(const ScalarFn& f, const ScalarFn& df, double lo, double hi,
                       double ftol, double xtol = 0.0);

/// n Chebyshev-Gauss points mapped into the open interval (lo, hi).
std::vector<double> chebyshev_points(double lo, double hi, std::size_t n);

}  // namespace secord
