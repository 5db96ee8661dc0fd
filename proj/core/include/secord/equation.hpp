#pragma once

#include <functional>
#include <string>
#include <utility>

#include "secord/expr.hpp"
#include "secord/integrator.hpp"

namespace secord {

/// A second-order equation G(x, y, y', y'') = 0, affine in y''.
class SecondOrderEquation {
 public:
  using Fn = std::function<double(double x, double y, double yp, double ypp)>;

  /// G in the variables x, y, yp, ypp. The residual scale is
  /// 1 + sum of |top-level additive terms|.
  static SecondOrderEquation from_expr(const Expr& G);
  static SecondOrderEquation from_function(Fn residual, Fn scale, std::string text);

  double residual(double x, double y, double yp, double ypp) const { return g_(x, y, yp, ypp); }
  double scale(double x, double y, double yp, double ypp) const { return scale_(x, y, yp, ypp); }

  /// (A, B) with G = A y'' + B at fixed (x, y, y').
  std::pair<double, double> affine(double x, double y, double yp) const;
  /// y'' = -B/A; LeadingCoefficientVanished when A is negligible.
  double resolve_ypp(double x, double y, double yp) const;
  SecondOrderRhs rhs() const;

  const std::string& text() const { return text_; }

 private:
  Fn g_;
  Fn scale_;
  std::string text_;
};

/// Operands of the outermost chain of + and - (with unary minus folded).
std::vector<Expr> additive_terms(const Expr& e);

}  // namespace secord
