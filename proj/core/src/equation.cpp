#include "secord/equation.hpp"

#include <cmath>

#include "secord/error.hpp"

namespace secord {
namespace {

void collect(const Expr& e, std::vector<Expr>& out) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      collect(e.children()[0], out);
      collect(e.children()[1], out);
      return;
    case Op::Neg:
      collect(e.children()[0], out);
      return;
    default:
      out.push_back(e);
  }
}

}  // namespace

std::vector<Expr> additive_terms(const Expr& e) {
  std::vector<Expr> out;
  collect(e, out);
  return out;
}

SecondOrderEquation SecondOrderEquation::from_expr(const Expr& G) {
  for (const auto& v : G.variables()) {
    if (v != "x" && v != "y" && v != "yp" && v != "ypp")
      throw Error(ErrorCode::UnknownIdentifier, "verify", "equation",
                  "equation may only use x, y, yp, ypp (found '" + v + "')");
  }
  auto terms = std::make_shared<const std::vector<Expr>>(additive_terms(G));
  SecondOrderEquation eq;
  eq.g_ = [G](double x, double y, double yp, double ypp) {
    return evaluate(G, Env{{"x", x}, {"y", y}, {"yp", yp}, {"ypp", ypp}});
  };
  eq.scale_ = [terms](double x, double y, double yp, double ypp) {
    const Env env{{"x", x}, {"y", y}, {"yp", yp}, {"ypp", ypp}};
    double s = 1.0;
    for (const auto& t : *terms) s += std::abs(evaluate(t, env));
    return s;
  };
  eq.text_ = G.to_string() + " = 0";
  return eq;
}

SecondOrderEquation SecondOrderEquation::from_function(Fn residual, Fn scale, std::string text) {
  SecondOrderEquation eq;
  eq.g_ = std::move(residual);
  eq.scale_ = std::move(scale);
  eq.text_ = std::move(text);
  return eq;
}

std::pair<double, double> SecondOrderEquation::affine(double x, double y, double yp) const {
  const double B = g_(x, y, yp, 0.0);
  const double A = g_(x, y, yp, 1.0) - B;
  return {A, B};
}

double SecondOrderEquation::resolve_ypp(double x, double y, double yp) const {
  const auto [A, B] = affine(x, y, yp);
  if (A == 0.0 || std::abs(A) <= 1e-13 * std::abs(B) || !std::isfinite(A))
    throw Error(ErrorCode::LeadingCoefficientVanished, "verify", "integrate_ivp",
                "leading coefficient vanishes at x=" + std::to_string(x), {x, y, yp});
  return -B / A;
}

SecondOrderRhs SecondOrderEquation::rhs() const {
  return [eq = *this](double x, double y, double yp) { return eq.resolve_ypp(x, y, yp); };
}

}  // namespace secord
