#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "secord/closed_form.hpp"
#include "secord/equation.hpp"
#include "secord/expr.hpp"
#include "secord/forcing.hpp"
#include "secord/reduction.hpp"

namespace secord {

enum class FKind { ExpY, HalfSquare, Custom };
enum class Branch { Unspecified, Positive, Negative };

std::string_view to_string(FKind k);
std::string_view to_string(Branch b);

/// z = f(y) with f C^2 and strictly monotone on `interval`.
struct FSpec {
  FKind kind = FKind::ExpY;
  Expr custom;  // f(y) for FKind::Custom
  Interval interval{-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
  Branch branch = Branch::Unspecified;

  static FSpec exp_y();
  static FSpec half_square(Branch b = Branch::Unspecified);
  static FSpec custom_f(Expr f, Interval monotone);

  /// (f, f', f'') at y.
  Dual2 derivs(double y) const;
  double operator()(double y) const { return derivs(y).value; }
  /// Jet of f(y(x)) from the jet of y.
  Dual2 compose(const Dual2& y) const;
  /// Image of the monotone interval (open ends where f is unbounded).
  Interval range() const;
  /// The branch interval actually used for inversion.
  Interval branch_interval() const;
  std::string text() const;
  /// f' != 0 at 64 interior points of the branch interval.
  void validate() const;
};

/// Unique y on the branch with f(y) = z. OutOfRange, BranchRequired.
double invert_f(const FSpec& f, double z);
/// (g, g', g'') for g = f^-1 at z.
Dual2 invert_f_derivs(const FSpec& f, double z);

/// a2 (f(y))'' + a1 (f(y))' + a0 f(y) = g(x)
struct FConstantCoeff {
  double a2 = 1.0;
  double a1 = 0.0;
  double a0 = 0.0;
  ForcingSpec g;  // as a function of x
};

/// p(x) (f(y))'' + c1(x) (f(y))' + a0 f(y) = 0 with c1 = p'/2
struct FWeighted {
  Expr p;
  Expr yp_coeff;
  double a0 = 0.0;
};

struct FTypeProblem {
  std::variant<FConstantCoeff, FWeighted> spec;
  FSpec fspec;
  Interval domain;
  std::optional<double> x0;
  std::optional<InitialConditions> ics;
  std::optional<std::array<double, 2>> coefficients;
  /// The y-equation as written (x, y, yp, ypp), checked against the
  /// synthesized one when present.
  std::optional<Expr> literal_equation;

  /// The y-equation synthesized from the decomposition.
  SecondOrderEquation synthesized_equation() const;
  /// literal_equation when given, else the synthesized one.
  SecondOrderEquation y_equation() const;
};

/// Linear problem in z produced by the substitution.
struct LinearZProblem {
  std::variant<GeneralSolution, OdeProblem> form;  // constant coeff in x, or Chebyshev-type in z
  std::optional<InitialConditions> ics;            // (x_i, z_i, zp_i)
  FSpec fspec;                                     // with the branch resolved
  std::string text;
};

/// Verifies the substitution identity and, when a literal y-equation is
/// supplied, its proportionality to the synthesized equation; throws
/// StructureMismatch otherwise.
LinearZProblem apply_substitution(const FTypeProblem& problem);

/// max |(f(y))''_AD - (f' y'' + f'' y'^2)| over n random triples.
double substitution_identity_error(const FSpec& f, std::size_t n = 200, unsigned seed = 7);

struct FTypeSolution {
  LinearZProblem linear;
  std::vector<ClosedForm> z;
  std::vector<ClosedForm> y;
  std::vector<Interval> range_violations;  // parts of the domain removed
  std::vector<std::string> notes;
};

/// z-solve then y = f^-1(z), with the domain trimmed to where z stays in
/// the open range of f around the anchor.
FTypeSolution solve_f_type(const FTypeProblem& problem, double tol = 1e-10);

}  // namespace secord
