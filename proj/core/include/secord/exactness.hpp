#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "secord/expr.hpp"
#include "secord/integrator.hpp"
#include "secord/reduction.hpp"

namespace secord {

/// Anchor or initial point (x, z, z').
struct Point3 {
  double x = 0.0;
  double z = 0.0;
  double zp = 0.0;
};

/// a2(x,z,zp) z'' + a1(x,z,zp) z' + a0(x,z,zp) = 0
struct QuasiLinearOde {
  Expr a2;
  Expr a1;
  Expr a0;
  Interval domain;
  std::optional<Point3> ics;

  /// a2 z'' + a1 zp + a0 written in x, y, yp, ypp (z renamed to y).
  Expr equation() const;
  /// z'' = -(a1 zp + a0)/a2
  SecondOrderRhs rhs() const;
};

struct Box {
  Interval x;
  Interval z;
  Interval zp;
};

/// [x0 +- 1] x [z0 +- 1] x [zp0 +- 1], x clipped to the domain.
Box default_box(const QuasiLinearOde& ode);

struct ExactnessReport {
  /// Per condition: a2_z - a1_zp, a2_x - a0_zp, a1_x - a0_z.
  std::array<double, 3> max_raw{};
  std::array<double, 3> max_scaled{};  // divided by max(1, |a2|, |a1|, |a0|)
  bool exact = false;
  std::optional<Point3> witness;
  std::array<double, 3> witness_residuals{};
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  double tol = 1e-8;
  Box box;
};

/// Quasi-random Halton samples in the box; points with domain errors are
/// skipped, and at least 80% must evaluate (InsufficientSamples).
ExactnessReport check_exactness(const QuasiLinearOde& ode, const Box& box, double tol = 1e-8,
                                std::size_t samples = 128);

/// (mu a2, mu a1, mu a0); ZeroMu when mu vanishes at a box sample.
QuasiLinearOde apply_mu(const Expr& mu, const QuasiLinearOde& ode, const Box& box);

struct LinearCriterionReport {
  bool holds = false;
  double max_raw = 0.0;     // max |a2 a1' - a1 a2' - a0 a2|
  double max_scaled = 0.0;  // relative to |a2 a1'| + |a1 a2'| + |a0 a2| (at least 1)
  std::size_t samples = 0;
};

/// W(a2, a1) = a0 a2 at n points of the interval (x-only coefficients).
LinearCriterionReport linear_ifactor_check(const Expr& a2, const Expr& a1, const Expr& a0,
                                           Interval interval, double tol = 1e-10,
                                           std::size_t n = 64);

/// a2 y'' + a1 y' + a0 y = h as a quasi-linear triple (a2, a1, a0 z - h).
QuasiLinearOde linear_to_quasilinear(const Expr& a2, const Expr& a1, const Expr& a0,
                                     const Expr& h, Interval domain);

/// Phi(x, z, zp) = int_{x0}^{x} a0(s, z, zp) ds + int_{z0}^{z} a1(x0, s, zp) ds
///               + int_{zp0}^{zp} a2(x0, z0, s) ds,
/// anchored so that Phi(x0, z0, zp0) = 0.
class FirstIntegral {
 public:
  static FirstIntegral build(const QuasiLinearOde& ode, Point3 anchor, double tol = 1e-10);

  double operator()(double x, double z, double zp) const;
  double constant() const { return 0.0; }
  Point3 anchor() const { return anchor_; }
  /// Leibniz derivative in zp; equals a2(x, z, zp) for exact equations.
  double dphi_dzp(double x, double z, double zp) const;
  /// zp in [lo, hi] with Phi(x, z, zp) = target. NonMonotone, NoRootInBracket.
  double solve_zprime(double x, double z, double lo, double hi, double target = 0.0) const;
  /// As above, expanding a bracket around `guess`.
  double solve_zprime_near(double x, double z, double guess, double target = 0.0) const;

 private:
  friend Trajectory integrate_first_order(const FirstIntegral&, double, double, double, double,
                                          double);
  FirstIntegral() = default;
  Expr a2_, a1_, a0_;
  Point3 anchor_;
  double tol_ = 1e-10;
};

struct DriftReport {
  double max_drift = 0.0;
  double at_x = 0.0;
  std::size_t samples = 0;
};

/// Integrates the first-order equation z' = zp(x, z) defined implicitly by
/// Phi(x, z, zp) = c from (x0, z0) to x1.
Trajectory integrate_first_order(const FirstIntegral& fi, double x0, double z0, double zp0,
                                 double x1, double tol);

}  // namespace secord
