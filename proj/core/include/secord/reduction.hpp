#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "secord/expr.hpp"
#include "secord/forcing.hpp"

namespace secord {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct InitialConditions {
  double x = 0.0;
  double y = 0.0;
  double yp = 0.0;
};

enum class WeightMode { SqrtP, DirectP };

/// t(x) = integral from x0 to x of dxi / w(xi), with w = sqrt(p) or w = P.
///
/// Knots cover the domain (512 uniform segments plus geometric clustering
/// toward endpoints where w vanishes). Between knots the map is available
/// both as a cubic Hermite interpolant and as knot value plus a local
/// adaptive quadrature; operator() uses the latter.
class TransformMap {
 public:
  static constexpr std::size_t kMinSegments = 512;

  static TransformMap build(const Expr& weight, WeightMode mode, Interval domain, double x0,
                            double tol = 1e-10);

  double operator()(double x) const;
  double interpolate(double x) const;
  /// (t, dt/dx, d2t/dx2) at x.
  Dual2 jet(double x) const;
  double weight(double x) const;
  Dual2 weight_jet(double x) const;

  /// x with t(x) = t; OutOfRange outside [t(lo), t(hi)].
  double invert(double t) const;

  WeightMode mode() const { return mode_; }
  const Expr& weight_expr() const { return w_; }
  double x0() const { return x0_; }
  Interval domain() const { return domain_; }
  Interval t_range() const { return {t_lo_, t_hi_}; }
  bool singular_lo() const { return singular_lo_; }
  bool singular_hi() const { return singular_hi_; }
  double tolerance() const { return tol_; }
  double interpolation_error() const { return interp_error_; }
  std::span<const double> knots_x() const { return xs_; }
  std::span<const double> knots_t() const { return ts_; }

 private:
  TransformMap() = default;
  std::size_t segment(double x) const;
  double local_integral(double from, double to) const;

  Expr w_;
  WeightMode mode_ = WeightMode::SqrtP;
  Interval domain_;
  double x0_ = 0.0;
  double tol_ = 1e-10;
  bool singular_lo_ = false;
  bool singular_hi_ = false;
  double t_lo_ = 0.0;
  double t_hi_ = 0.0;
  double interp_error_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> ts_;
  std::vector<double> slopes_;
};

/// Chebyshev-type equation p y'' + c1 y' + f(sqrt(p) y', y) = 0. `f` is an
/// expression in `v` (standing for sqrt(p) y') and `y`; `c1` is the y'
/// coefficient as written, checked against p'/2.
struct ChebyshevSpec {
  Expr p;
  Expr yp_coeff;
  Expr f;
};

/// [P]^2 y'' + c1 y' + beta y = h(x), with c1 checked against
/// P (alpha + P'). The forcing must be supplied in t-form as well.
struct LinearWeightedSpec {
  Expr P;
  Expr yp_coeff;
  double alpha = 0.0;
  double beta = 0.0;
  Expr h;                  // forcing in x, used for residuals
  ForcingSpec forcing;     // the same forcing as a function of t
};

enum class OdeClass { ChebyshevType, LinearWeighted, FType, QuasiLinear };

std::string_view to_string(OdeClass c);

struct OdeProblem {
  std::variant<ChebyshevSpec, LinearWeightedSpec> spec;
  Interval domain;
  std::optional<double> x0;
  std::optional<InitialConditions> ics;

  OdeClass ode_class() const {
    return std::holds_alternative<ChebyshevSpec>(spec) ? OdeClass::ChebyshevType
                                                       : OdeClass::LinearWeighted;
  }
  /// Explicit x0, else the IC abscissa, else the domain midpoint.
  double anchor() const;
  /// The y-equation as an expression in x, y, yp, ypp.
  Expr equation() const;
};

struct TransformedIcs {
  double t = 0.0;
  double y = 0.0;
  double v = 0.0;
};

/// y_tt + f(y, y_t) = 0  or  y_tt + alpha y_t + beta y = H(t).
struct ReducedOde {
  enum class Form { Autonomous, LinearCC };

  Form form = Form::Autonomous;
  Expr f;  // autonomous payload, variables "y" and "v" (v = y_t)
  double alpha = 0.0;
  double beta = 0.0;
  ForcingSpec forcing;
  std::optional<TransformedIcs> ics;
  std::shared_ptr<const TransformMap> tmap;

  bool depends_on_velocity() const;
  std::string text() const;
};

ReducedOde reduce_problem(const OdeProblem& problem, double tol = 1e-10);

/// Numeric check of the y'-coefficient pattern at 32 Chebyshev points.
/// Throws StructureMismatch naming the first failing x.
void check_pattern(const std::function<double(double)>& actual,
                   const std::function<double(double)>& expected, Interval domain,
                   const std::string& what, double rtol = 1e-8);

/// Remark-style energy integral for y_tt + f(y) = 0: v^2 = c - 2 F(y), with
/// F(y) = integral of f from y0 to y.
class EnergyIntegral {
 public:
  EnergyIntegral(Expr f_of_y, double y0, double v0);

  double constant() const { return c_; }
  double antiderivative(double y) const;
  double velocity_squared(double y) const { return c_ - 2.0 * antiderivative(y); }
  /// sign(v0) branch; v0 = 0 resolves by the sign of -f(y0).
  double velocity(double y) const;
  double sign() const { return sign_; }
  /// v^2 + 2 F(y) - c; zero along exact trajectories.
  double defect(double y, double v) const { return v * v + 2.0 * antiderivative(y) - c_; }

 private:
  Expr f_;
  double y0_;
  double c_;
  double sign_;
};

EnergyIntegral energy_first_integral(const Expr& f_of_y, double y0, double v0);

}  // namespace secord
