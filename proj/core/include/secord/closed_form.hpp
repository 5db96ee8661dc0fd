#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "secord/expr.hpp"
#include "secord/forcing.hpp"
#include "secord/integrator.hpp"
#include "secord/reduction.hpp"

namespace secord {

/// Homogeneous basis of y'' + alpha y' + beta y = 0, as expressions in t.
struct Basis {
  enum class Kind { DistinctReal, DoubleRoot, Complex };
  Kind kind = Kind::DistinctReal;
  double r1 = 0.0;  // real roots, or sigma for Complex
  double r2 = 0.0;  // second real root, or omega for Complex
  Expr y1;
  Expr y2;
};

std::string_view to_string(Basis::Kind k);

Basis solve_homogeneous_cc(double alpha, double beta, std::string_view var = "t");

/// Multiplicity of lambda = rate + i*frequency as a root of r^2 + alpha r + beta.
int resonance_multiplicity(double alpha, double beta, double rate, double frequency);

/// Undetermined coefficients over the ForcingSpec family. The result is
/// substituted back and rejected with InternalVerificationFailed when the
/// residual exceeds 1e-10 (scaled) at 16 sample points.
Expr solve_particular_cc(double alpha, double beta, const ForcingSpec& forcing,
                         std::string_view var = "t");

struct GeneralSolution {
  double alpha = 0.0;
  double beta = 0.0;
  ForcingSpec forcing;
  std::string var = "t";
  Basis basis;
  Expr particular;

  /// c1 y1 + c2 y2 + particular
  Expr combine(double c1, double c2) const;
};

GeneralSolution solve_general_cc(double alpha, double beta, const ForcingSpec& forcing,
                                 std::string_view var = "t");

struct FittedSolution {
  Expr y;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// 2x2 solve (partial pivoting) for the basis coefficients matching
/// y(t0) = y0, y'(t0) = v0. Throws SingularWronskian.
FittedSolution apply_initial_conditions(const GeneralSolution& general, double t0, double y0,
                                        double v0);

/// max |Y'' + alpha Y' + beta Y - H| / (1 + max |Y|) over n points of [lo, hi].
double cc_residual(const GeneralSolution& eq, const Expr& Y, double lo, double hi,
                   std::size_t n = 64);

/// Outer map applied last in a composition chain, e.g. y = f^-1(z).
/// `derivs(z)` returns (g(z), g'(z), g''(z)).
struct OuterMap {
  std::string description;
  std::function<Dual2(double)> derivs;
};

/// A solution record y(x) evaluable with first and second derivatives.
///
/// The body is an expression or a numeric trajectory in its own variable
/// (t or x). When a TransformMap is attached the body variable is t and
/// the chain is y(x) = body(t(x)); an outer map is applied after that.
class ClosedForm {
 public:
  using Body = std::variant<Expr, std::shared_ptr<const Trajectory>>;

  ClosedForm() = default;
  static ClosedForm from_expr(Expr body, std::string var, Interval valid);
  static ClosedForm from_trajectory(std::shared_ptr<const Trajectory> traj, std::string var);

  /// (y, y', y'') at x; OutOfDomain outside the valid interval.
  Dual2 jet(double x) const;
  double operator()(double x) const { return jet(x).value; }
  /// Body jet in its own variable.
  Dual2 body_jet(double s) const;

  const Body& body() const { return body_; }
  const std::string& var() const { return var_; }
  const std::shared_ptr<const TransformMap>& tmap() const { return tmap_; }
  const std::optional<OuterMap>& outer() const { return outer_; }
  bool is_numeric() const { return std::holds_alternative<std::shared_ptr<const Trajectory>>(body_); }
  /// Body expression when symbolic.
  std::optional<Expr> body_expr() const;

  Interval valid;
  bool singular_lo = false;
  bool singular_hi = false;
  std::vector<std::string> notes;

  void set_outer(OuterMap m) { outer_ = std::move(m); }
  void set_tmap(std::shared_ptr<const TransformMap> m) { tmap_ = std::move(m); }

  /// Chain description, innermost first.
  std::vector<std::string> chain() const;
  std::string describe() const;

 private:
  Body body_;
  std::string var_ = "x";
  std::shared_ptr<const TransformMap> tmap_;
  std::optional<OuterMap> outer_;
};

/// y(x) = Y(t(x)); valid interval is the preimage of Y's domain.
ClosedForm compose_solution(const ClosedForm& Y, std::shared_ptr<const TransformMap> tmap);

struct SolveOptions {
  std::optional<std::array<double, 2>> coefficients;
  double rtol = 1e-12;
  double blowup = 1e8;
};

struct SolveOutcome {
  std::vector<ClosedForm> solutions;
  std::optional<GeneralSolution> general;
  std::vector<std::string> notes;
};

/// Solve a reduced equation and compose back to x. LinearCC yields the
/// fitted solution (ICs), the given coefficient pair, or both basis
/// members plus the particular part. Autonomous forms are integrated
/// numerically in t from the transformed ICs, stopping at blow-up.
SolveOutcome solve_reduced(const ReducedOde& reduced, const SolveOptions& opt = {});

}  // namespace secord
