#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "secord/closed_form.hpp"
#include "secord/equation.hpp"
#include "secord/exactness.hpp"
#include "secord/integrator.hpp"
#include "secord/reduction.hpp"

namespace secord {

struct ResidualOptions {
  std::size_t grid = 257;
  double tol = 1e-8;      // on the scaled residual
  double ic_tol = 1e-9;
  double margin = 1e-3;   // fraction of the span trimmed at singular ends
  /// Grid points where this returns false are skipped.
  std::function<bool(double)> include;
};

struct VerificationReport {
  Interval requested;
  Interval checked;
  std::size_t grid = 0;
  std::size_t evaluated = 0;
  std::size_t failed_points = 0;  // grid points where evaluation raised
  double max_abs = 0.0;
  double max_scaled = 0.0;
  double l2_scaled = 0.0;  // root mean square of the scaled residual
  double argmax = 0.0;
  std::optional<std::array<double, 2>> ic_error;
  std::optional<double> drift;
  double tol = 0.0;
  double ic_tol = 0.0;
  bool pass = false;
  std::vector<std::string> notes;
};

/// Residual of the candidate in the equation on a uniform grid, with y, y',
/// y'' from the candidate's jet. Endpoints flagged singular on the
/// candidate, or where the candidate or the leading coefficient fail, are
/// trimmed by margin * span. EmptyGridAfterTrim when nothing remains.
VerificationReport residual_check(const ClosedForm& y, const SecondOrderEquation& eq,
                                  Interval interval, const ResidualOptions& opt = {},
                                  const std::optional<InitialConditions>& ics = std::nullopt);

/// Integrate eq from the ICs across [lo, hi] (two-sided when x0 is interior).
Trajectory integrate_equation(const SecondOrderEquation& eq, const InitialConditions& ics,
                              double lo, double hi, double tol);

using Invariant = std::function<double(double x, double z, double zp)>;

/// max |Phi(x_k, z_k, zp_k) - c| over the trajectory samples.
DriftReport conservation_check(const Invariant& phi, double c, const Trajectory& traj);
DriftReport conservation_check(const FirstIntegral& fi, const Trajectory& traj);

/// Q[y] = int sqrt(p) y'^2 + h(y)/sqrt(p) dx over the interval.
double functional_value(const Expr& p, const Expr& h, const ClosedForm& y, Interval interval,
                        double tol = 1e-9);

struct StationarityOptions {
  std::array<double, 2> epsilons{1e-3, 1e-4};
  double el_tol = 1e-8;
  double tol = 1e-9;  // quadrature
  bool force = false;
};

struct StationarityReport {
  double derivative = 0.0;  // Richardson-combined dQ/d(eps) at 0
  std::array<double, 2> central{};
  double el_residual = 0.0;  // scaled
  double eta_boundary = 0.0;
  bool precondition_ok = false;
  bool forced = false;
};

/// Euler-Lagrange residual p y'' + p' y'/2 - h'(y)/2 of y on a 257-point grid,
/// scaled by 1 + sum of the term magnitudes.
double euler_lagrange_residual(const Expr& p, const Expr& h, const ClosedForm& y,
                               Interval interval);

/// Central differences of Q[y + eps eta] at eps = +-1e-3, +-1e-4 computed as
/// integrals of the pointwise difference quotient, then Richardson. Throws
/// PreconditionFailed when y is not an EL solution or eta does not vanish
/// at the ends, unless opt.force.
StationarityReport stationarity_check(const Expr& p, const Expr& h, const ClosedForm& ystar,
                                      const ClosedForm& eta, Interval interval,
                                      const StationarityOptions& opt = {});

}  // namespace secord
