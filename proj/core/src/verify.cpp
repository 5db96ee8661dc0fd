#include "secord/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "secord/error.hpp"
#include "secord/numerics.hpp"

namespace secord {
namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& op, const std::string& msg,
                       std::vector<double> point = {}) {
  throw Error(code, "verify", op, msg, std::move(point));
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Candidate and equation both usable at x.
bool usable_at(const ClosedForm& y, const SecondOrderEquation& eq, double x) {
  try {
    const Dual2 j = y.jet(x);
    const auto [A, B] = eq.affine(x, j.value, j.d1);
    return std::isfinite(j.value) && std::isfinite(j.d1) && std::isfinite(j.d2) &&
           std::isfinite(A) && std::isfinite(B) && std::abs(A) > 1e-13 * std::abs(B) && A != 0.0;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

VerificationReport residual_check(const ClosedForm& y, const SecondOrderEquation& eq,
                                  Interval interval, const ResidualOptions& opt,
                                  const std::optional<InitialConditions>& ics) {
  VerificationReport rep;
  rep.requested = interval;
  rep.tol = opt.tol;
  rep.ic_tol = opt.ic_tol;
  const double span = interval.length();
  const double trim = opt.margin * span;
  Interval c{std::max(interval.lo, y.valid.lo), std::min(interval.hi, y.valid.hi)};
  if (!(c.lo < c.hi))
    fail(ErrorCode::EmptyGridAfterTrim, "residual_check",
         "requested interval does not meet the solution's valid interval");
  if ((c.lo == y.valid.lo && y.singular_lo) || !usable_at(y, eq, c.lo)) {
    c.lo += trim;
    rep.notes.push_back("trimmed singular lower end to " + num(c.lo));
  }
  if ((c.hi == y.valid.hi && y.singular_hi) || !usable_at(y, eq, c.hi)) {
    c.hi -= trim;
    rep.notes.push_back("trimmed singular upper end to " + num(c.hi));
  }
  if (!(c.lo < c.hi) || opt.grid < 2)
    fail(ErrorCode::EmptyGridAfterTrim, "residual_check", "no grid left after trimming");
  rep.checked = c;
  rep.grid = opt.grid;

  double sumsq = 0.0;
  for (std::size_t i = 0; i < opt.grid; ++i) {
    const double x = i + 1 == opt.grid
                         ? c.hi
                         : c.lo + (c.hi - c.lo) * static_cast<double>(i) / static_cast<double>(opt.grid - 1);
    if (opt.include && !opt.include(x)) continue;
    double r = 0.0, s = 1.0;
    try {
      const Dual2 j = y.jet(x);
      r = eq.residual(x, j.value, j.d1, j.d2);
      s = eq.scale(x, j.value, j.d1, j.d2);
    } catch (const Error& e) {
      if (rep.failed_points == 0) rep.notes.push_back("evaluation failed at x=" + num(x) + ": " + e.what());
      ++rep.failed_points;
      continue;
    }
    if (!std::isfinite(r) || !std::isfinite(s)) {
      if (rep.failed_points == 0) rep.notes.push_back("non-finite residual at x=" + num(x));
      ++rep.failed_points;
      continue;
    }
    ++rep.evaluated;
    const double scaled = std::abs(r) / s;
    rep.max_abs = std::max(rep.max_abs, std::abs(r));
    if (scaled > rep.max_scaled || rep.evaluated == 1) {
      rep.max_scaled = std::max(rep.max_scaled, scaled);
      rep.argmax = x;
    }
    sumsq += scaled * scaled;
  }
  if (rep.evaluated == 0)
    fail(ErrorCode::EmptyGridAfterTrim, "residual_check", "no grid point selected for evaluation");
  rep.l2_scaled = std::sqrt(sumsq / static_cast<double>(rep.evaluated));

  bool ic_ok = true;
  if (ics) {
    try {
      const Dual2 j = y.jet(ics->x);
      rep.ic_error = std::array<double, 2>{std::abs(j.value - ics->y), std::abs(j.d1 - ics->yp)};
      ic_ok = (*rep.ic_error)[0] <= opt.ic_tol * (1.0 + std::abs(ics->y)) &&
              (*rep.ic_error)[1] <= opt.ic_tol * (1.0 + std::abs(ics->yp));
    } catch (const Error& e) {
      rep.notes.push_back(std::string("initial point not evaluable: ") + e.what());
      ic_ok = false;
    }
  }
  rep.pass = rep.failed_points == 0 && rep.max_scaled <= opt.tol && ic_ok;
  return rep;
}

Trajectory integrate_equation(const SecondOrderEquation& eq, const InitialConditions& ics,
                              double lo, double hi, double tol) {
  IntegratorOptions opt;
  opt.rtol = tol;
  opt.atol = tol;
  const SecondOrderRhs rhs = eq.rhs();
  if (ics.x <= lo) return integrate_ivp(rhs, ics.x, ics.y, ics.yp, hi, opt);
  if (ics.x >= hi) return integrate_ivp(rhs, ics.x, ics.y, ics.yp, lo, opt);
  return integrate_two_sided(rhs, ics.x, ics.y, ics.yp, lo, hi, opt);
}

DriftReport conservation_check(const Invariant& phi, double c, const Trajectory& traj) {
  DriftReport d;
  for (const auto& s : traj.samples()) {
    const double v = std::abs(phi(s.x, s.y, s.yp) - c);
    if (v > d.max_drift || d.samples == 0) {
      d.max_drift = std::max(d.max_drift, v);
      d.at_x = s.x;
    }
    ++d.samples;
  }
  return d;
}

DriftReport conservation_check(const FirstIntegral& fi, const Trajectory& traj) {
  return conservation_check([&fi](double x, double z, double zp) { return fi(x, z, zp); },
                            fi.constant(), traj);
}

namespace {

double lagrangian(const Expr& p, const Expr& h, double x, double y, double yp) {
  const double sp = std::sqrt(evaluate(p, Env{{"x", x}}));
  if (!(sp > 0.0))
    fail(ErrorCode::DomainError, "functional_value", "p must be positive (x=" + num(x) + ")", {x});
  return sp * yp * yp + evaluate(h, Env{{"y", y}}) / sp;
}

}  // namespace

double functional_value(const Expr& p, const Expr& h, const ClosedForm& y, Interval interval,
                        double tol) {
  auto f = [&](double x) {
    const Dual2 j = y.jet(x);
    return lagrangian(p, h, x, j.value, j.d1);
  };
  return adaptive_simpson(f, interval.lo, interval.hi, tol).value;
}

double euler_lagrange_residual(const Expr& p, const Expr& h, const ClosedForm& y,
                               Interval interval) {
  constexpr std::size_t n = 257;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = interval.lo + interval.length() * static_cast<double>(i) / (n - 1);
    const Dual2 j = y.jet(x);
    const Dual2 pj = differentiate(p, "x", Env{{"x", x}});
    const double hy = differentiate(h, "y", Env{{"y", j.value}}).d1;
    const double t1 = pj.value * j.d2, t2 = 0.5 * pj.d1 * j.d1, t3 = -0.5 * hy;
    const double r = std::abs(t1 + t2 + t3) / (1.0 + std::abs(t1) + std::abs(t2) + std::abs(t3));
    worst = std::max(worst, r);
  }
  return worst;
}

StationarityReport stationarity_check(const Expr& p, const Expr& h, const ClosedForm& ystar,
                                      const ClosedForm& eta, Interval interval,
                                      const StationarityOptions& opt) {
  StationarityReport rep;
  rep.el_residual = euler_lagrange_residual(p, h, ystar, interval);
  rep.eta_boundary = std::max(std::abs(eta(interval.lo)), std::abs(eta(interval.hi)));
  rep.precondition_ok = rep.el_residual <= opt.el_tol && rep.eta_boundary <= 1e-12;
  if (!rep.precondition_ok) {
    if (!opt.force) {
      std::string why = rep.eta_boundary > 1e-12
                            ? "perturbation does not vanish at the endpoints (" + num(rep.eta_boundary) + ")"
                            : "candidate is not an Euler-Lagrange solution (scaled residual " +
                                  num(rep.el_residual) + ")";
      fail(ErrorCode::PreconditionFailed, "stationarity_check", why);
    }
    rep.forced = true;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    const double e = opt.epsilons[k];
    auto q = [&](double x) {
      const Dual2 y = ystar.jet(x);
      const Dual2 n = eta.jet(x);
      const double up = lagrangian(p, h, x, y.value + e * n.value, y.d1 + e * n.d1);
      const double dn = lagrangian(p, h, x, y.value - e * n.value, y.d1 - e * n.d1);
      return (up - dn) / (2.0 * e);
    };
    rep.central[k] = adaptive_simpson(q, interval.lo, interval.hi, opt.tol).value;
  }
  const double e1 = opt.epsilons[0] * opt.epsilons[0], e2 = opt.epsilons[1] * opt.epsilons[1];
  rep.derivative = (e1 * rep.central[1] - e2 * rep.central[0]) / (e1 - e2);
  return rep;
}

}  // namespace secord
