#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "secord/error.hpp"
#include "secord/numerics.hpp"

namespace secord {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct SimpsonState {
  const ScalarFn& f;
  std::size_t evaluations = 0;
  bool converged = true;
  double error = 0.0;

  double eval(double x) {
    ++evaluations;
    return f(x);
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole,
                 double tol, int depth, int min_depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double sum = left + right;
    const double delta = sum - whole;
    const bool fine_enough = std::abs(delta) <= 15.0 * tol ||
                             std::abs(delta) <= 64.0 * kEps * std::abs(sum);
    const bool exhausted = depth <= 0 || lm == a || rm == b || m == a || m == b;
    if ((fine_enough && min_depth <= 0) || exhausted) {
      if (exhausted && !fine_enough) converged = false;
      error += std::abs(delta) / 15.0;
      return sum + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, min_depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, min_depth - 1);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const ScalarFn& f, double a, double b, double tol,
                                  int max_depth) {
  if (a == b) return {};
  SimpsonState s{f};
  const double fa = s.eval(a);
  const double fb = s.eval(b);
  const double m = 0.5 * (a + b);
  const double fm = s.eval(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double v = s.recurse(a, b, fa, fm, fb, whole, tol, max_depth, 2);
  QuadratureResult r;
  r.value = v;
  r.error = s.error;
  r.converged = s.converged && std::isfinite(v);
  r.evaluations = s.evaluations;
  return r;
}

QuadratureResult improper_integral(const ScalarFn& f, double singular, double other,
                                   double tol) {
  const double span = other - singular;
  QuadratureResult total;
  double previous = 0.0;
  double previous_ratio = 0.0;
  int contracting = 0;
  constexpr int kMaxPieces = 400;
  for (int k = 0; k < kMaxPieces; ++k) {
    const double outer = singular + std::ldexp(span, -k);
    const double inner = singular + std::ldexp(span, -(k + 1));
    if (inner == singular || inner == outer) break;
    const QuadratureResult piece = adaptive_simpson(f, inner, outer, 0.25 * tol);
    total.evaluations += piece.evaluations;
    total.error += piece.error;
    if (!piece.converged) {
      throw Error(ErrorCode::DivergentIntegral, "quadrature", "improper_integral",
                  "quadrature failed on [" + std::to_string(inner) + ", " +
                      std::to_string(outer) + "]",
                  {inner, outer});
    }
    total.value += piece.value;
    const double c = std::abs(piece.value);
    if (k > 0) {
      const double ratio = previous > 0.0 ? c / previous : 0.0;
      contracting = ratio < 0.95 ? contracting + 1 : 0;
      if (contracting >= 3) {
        // geometric tail, same sign as the last piece; its uncertainty is
        // driven by how much the contraction ratio still moves
        const double tail = c * ratio / (1.0 - ratio);
        const double drift = std::abs(ratio - previous_ratio) / (1.0 - ratio);
        if (tail < tol || tail * drift < 0.25 * tol) {
          total.value += std::copysign(tail, piece.value);
          total.error += tail < tol ? tail : tail * drift;
          return total;
        }
      }
      if (c == 0.0 && previous == 0.0) return total;
      previous_ratio = ratio;
    }
    previous = c;
  }
  throw Error(ErrorCode::DivergentIntegral, "quadrature", "improper_integral",
              "integral does not converge toward the endpoint " + std::to_string(singular),
              {singular});
}

double solve_bracketed(const ScalarFn& f, const ScalarFn& df, double lo, double hi,
                       double ftol, double xtol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (std::abs(flo) <= ftol) return lo;
  if (std::abs(fhi) <= ftol) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw Error(ErrorCode::NoRootInBracket, "numerics", "solve_bracketed",
                "function has the same sign at both ends of the bracket", {lo, hi});
  }
  double x = lo - flo * (hi - lo) / (fhi - flo);
  if (!(x > std::min(lo, hi) && x < std::max(lo, hi))) x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (std::abs(fx) <= ftol) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    const double width = std::abs(hi - lo);
    if (width <= xtol || width <= 4.0 * kEps * std::max(std::abs(lo), std::abs(hi))) {
      return std::abs(flo) < std::abs(fhi) ? lo : hi;
    }
    const double d = df(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : lo;
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    if (!(next > a && next < b)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

std::vector<double> chebyshev_points(double lo, double hi, std::size_t n) {
  std::vector<double> pts(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = std::cos(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * n));
    pts[n - 1 - k] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * c;
  }
  return pts;
}

}  // namespace secord
