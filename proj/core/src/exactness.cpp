#include "secord/exactness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "secord/error.hpp"
#include "secord/numerics.hpp"

namespace secord {
namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& op, const std::string& msg,
                       std::vector<double> point = {}) {
  throw Error(code, "exactness", op, msg, std::move(point));
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double radical_inverse(std::size_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

std::vector<Point3> halton(const Box& b, std::size_t n) {
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    pts.push_back({b.x.lo + b.x.length() * radical_inverse(i, 2),
                   b.z.lo + b.z.length() * radical_inverse(i, 3),
                   b.zp.lo + b.zp.length() * radical_inverse(i, 5)});
  }
  return pts;
}

Env env3(double x, double z, double zp) { return Env{{"x", x}, {"z", z}, {"zp", zp}}; }

void check_vars(const Expr& e, std::initializer_list<std::string_view> allowed, const char* what) {
  for (const auto& v : e.variables()) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      fail(ErrorCode::UnknownIdentifier, "quasilinear",
           std::string(what) + " uses unexpected variable '" + v + "'");
  }
}

}  // namespace

Expr QuasiLinearOde::equation() const {
  auto ren = [](const Expr& e) {
    return e.substitute("z", Expr::variable("y")).substitute("zp", Expr::variable("yp"));
  };
  return ren(a2) * Expr::variable("ypp") + ren(a1) * Expr::variable("yp") + ren(a0);
}

SecondOrderRhs QuasiLinearOde::rhs() const {
  return [a2 = a2, a1 = a1, a0 = a0](double x, double z, double zp) {
    const Env env = env3(x, z, zp);
    const double l = evaluate(a2, env);
    if (l == 0.0)
      throw Error(ErrorCode::LeadingCoefficientVanished, "verify", "integrate_ivp",
                  "a2 vanishes at x=" + num(x), {x, z, zp});
    return -(evaluate(a1, env) * zp + evaluate(a0, env)) / l;
  };
}

Box default_box(const QuasiLinearOde& ode) {
  if (!ode.ics)
    fail(ErrorCode::InvalidInput, "check_exactness",
         "a sample box is required when no initial point is given");
  const Point3 p = *ode.ics;
  Box b{{p.x - 1.0, p.x + 1.0}, {p.z - 1.0, p.z + 1.0}, {p.zp - 1.0, p.zp + 1.0}};
  if (ode.domain.lo < ode.domain.hi) {
    b.x.lo = std::max(b.x.lo, ode.domain.lo);
    b.x.hi = std::min(b.x.hi, ode.domain.hi);
  }
  return b;
}

ExactnessReport check_exactness(const QuasiLinearOde& ode, const Box& box, double tol,
                                std::size_t samples) {
  check_vars(ode.a2, {"x", "z", "zp"}, "a2");
  check_vars(ode.a1, {"x", "z", "zp"}, "a1");
  check_vars(ode.a0, {"x", "z", "zp"}, "a0");
  ExactnessReport rep;
  rep.tol = tol;
  rep.box = box;
  double worst = -1.0;
  for (const Point3& p : halton(box, samples)) {
    std::array<double, 3> raw{};
    double scale = 1.0;
    try {
      const Env env = env3(p.x, p.z, p.zp);
      const double a2z = differentiate(ode.a2, "z", env).d1;
      const double a1zp = differentiate(ode.a1, "zp", env).d1;
      const double a2x = differentiate(ode.a2, "x", env).d1;
      const double a0zp = differentiate(ode.a0, "zp", env).d1;
      const double a1x = differentiate(ode.a1, "x", env).d1;
      const double a0z = differentiate(ode.a0, "z", env).d1;
      raw = {a2z - a1zp, a2x - a0zp, a1x - a0z};
      scale = std::max({1.0, std::abs(evaluate(ode.a2, env)), std::abs(evaluate(ode.a1, env)),
                        std::abs(evaluate(ode.a0, env))});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DomainError && e.code() != ErrorCode::DivisionByZero) throw;
      ++rep.skipped;
      continue;
    }
    bool finite = true;
    for (double r : raw) finite = finite && std::isfinite(r);
    if (!finite || !std::isfinite(scale)) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    double local = 0.0;
    for (int c = 0; c < 3; ++c) {
      rep.max_raw[c] = std::max(rep.max_raw[c], std::abs(raw[c]));
      rep.max_scaled[c] = std::max(rep.max_scaled[c], std::abs(raw[c]) / scale);
      local = std::max(local, std::abs(raw[c]) / scale);
    }
    if (local > worst) {
      worst = local;
      rep.witness = p;
      rep.witness_residuals = raw;
    }
  }
  if (rep.evaluated * 5 < samples * 4)
    fail(ErrorCode::InsufficientSamples, "check_exactness",
         "only " + std::to_string(rep.evaluated) + " of " + std::to_string(samples) +
             " sample points evaluate in the box");
  rep.exact = rep.max_scaled[0] <= tol && rep.max_scaled[1] <= tol && rep.max_scaled[2] <= tol;
  return rep;
}

QuasiLinearOde apply_mu(const Expr& mu, const QuasiLinearOde& ode, const Box& box) {
  check_vars(mu, {"x", "z"}, "mu");
  if (mu.is_constant() && mu.constant_value() == 1.0) return ode;
  for (const Point3& p : halton(box, 128)) {
    double m = 0.0;
    try {
      m = evaluate(mu, Env{{"x", p.x}, {"z", p.z}});
    } catch (const Error&) {
      continue;
    }
    if (std::abs(m) < 1e-14)
      fail(ErrorCode::ZeroMu, "apply_mu",
           "integrating factor vanishes at (x, z) = (" + num(p.x) + ", " + num(p.z) + ")",
           {p.x, p.z});
  }
  QuasiLinearOde out = ode;
  out.a2 = mu * ode.a2;
  out.a1 = mu * ode.a1;
  out.a0 = mu * ode.a0;
  return out;
}

LinearCriterionReport linear_ifactor_check(const Expr& a2, const Expr& a1, const Expr& a0,
                                           Interval interval, double tol, std::size_t n) {
  check_vars(a2, {"x"}, "a2");
  check_vars(a1, {"x"}, "a1");
  check_vars(a0, {"x"}, "a0");
  LinearCriterionReport rep;
  for (double x : chebyshev_points(interval.lo, interval.hi, n)) {
    const Env env{{"x", x}};
    const Dual2 p = differentiate(a2, "x", env);
    const Dual2 q = differentiate(a1, "x", env);
    const double r = evaluate(a0, env);
    const double W = p.value * q.d1 - q.value * p.d1;
    const double raw = std::abs(W - r * p.value);
    const double scale = std::max(1.0, std::abs(p.value * q.d1) + std::abs(q.value * p.d1) +
                                           std::abs(r * p.value));
    rep.max_raw = std::max(rep.max_raw, raw);
    rep.max_scaled = std::max(rep.max_scaled, raw / scale);
    ++rep.samples;
  }
  rep.holds = rep.max_scaled <= tol;
  return rep;
}

QuasiLinearOde linear_to_quasilinear(const Expr& a2, const Expr& a1, const Expr& a0,
                                     const Expr& h, Interval domain) {
  QuasiLinearOde q;
  q.a2 = a2;
  q.a1 = a1;
  const bool no_h = h.is_constant() && h.constant_value() == 0.0;
  q.a0 = no_h ? a0 * Expr::variable("z") : a0 * Expr::variable("z") - h;
  q.domain = domain;
  return q;
}

// ---------------------------------------------------------------- first integral

FirstIntegral FirstIntegral::build(const QuasiLinearOde& ode, Point3 anchor, double tol) {
  check_vars(ode.a2, {"x", "z", "zp"}, "a2");
  check_vars(ode.a1, {"x", "z", "zp"}, "a1");
  check_vars(ode.a0, {"x", "z", "zp"}, "a0");
  FirstIntegral fi;
  fi.a2_ = ode.a2;
  fi.a1_ = ode.a1;
  fi.a0_ = ode.a0;
  fi.anchor_ = anchor;
  fi.tol_ = tol;
  try {
    const Env env = env3(anchor.x, anchor.z, anchor.zp);
    evaluate(ode.a2, env);
    evaluate(ode.a1, env);
    evaluate(ode.a0, env);
  } catch (const Error& e) {
    fail(e.code(), "first_integral_build",
         "coefficients not evaluable at the anchor; move the anchor: " + std::string(e.what()),
         {anchor.x, anchor.z, anchor.zp});
  }
  return fi;
}

double FirstIntegral::operator()(double x, double z, double zp) const {
  const Point3 a = anchor_;
  auto path = [&](const char* seg, auto&& f, double from, double to) {
    try {
      return adaptive_simpson(f, from, to, tol_).value;
    } catch (const Error& e) {
      fail(ErrorCode::DomainError, "first_integral",
           std::string("quadrature along ") + seg + " from " + num(from) + " to " + num(to) +
               " failed (" + e.what() + "); move the anchor",
           {x, z, zp});
    }
  };
  const double i1 = path(
      "x", [&](double s) { return evaluate(a0_, env3(s, z, zp)); }, a.x, x);
  const double i2 = path(
      "z", [&](double s) { return evaluate(a1_, env3(a.x, s, zp)); }, a.z, z);
  const double i3 = path(
      "zp", [&](double s) { return evaluate(a2_, env3(a.x, a.z, s)); }, a.zp, zp);
  return i1 + i2 + i3;
}

double FirstIntegral::dphi_dzp(double x, double z, double zp) const {
  const Point3 a = anchor_;
  const double i1 = adaptive_simpson(
      [&](double s) { return differentiate(a0_, "zp", env3(s, z, zp)).d1; }, a.x, x, tol_).value;
  const double i2 = adaptive_simpson(
      [&](double s) { return differentiate(a1_, "zp", env3(a.x, s, zp)).d1; }, a.z, z, tol_).value;
  return i1 + i2 + evaluate(a2_, env3(a.x, a.z, zp));
}

double FirstIntegral::solve_zprime(double x, double z, double lo, double hi, double target) const {
  auto g = [&](double zp) { return (*this)(x, z, zp) - target; };
  constexpr int kProbe = 9;
  double prev = g(lo), sign = 0.0;
  for (int i = 1; i < kProbe; ++i) {
    const double v = g(lo + (hi - lo) * i / (kProbe - 1));
    const double d = v - prev;
    if (d == 0.0 || (sign != 0.0 && d * sign < 0.0))
      fail(ErrorCode::NonMonotone, "first_integral_solve_zprime",
           "Phi is not monotone in zp on [" + num(lo) + ", " + num(hi) + "] at (x, z) = (" +
               num(x) + ", " + num(z) + ")",
           {x, z});
    sign = d;
    prev = v;
  }
  try {
    return solve_bracketed(g, [&](double zp) { return dphi_dzp(x, z, zp); }, lo, hi,
                           1e-11 * (1.0 + std::abs(target)));
  } catch (const Error& e) {
    rethrow_in(e, "exactness", "first_integral_solve_zprime");
  }
}

double FirstIntegral::solve_zprime_near(double x, double z, double guess, double target) const {
  auto g = [&](double zp) { return (*this)(x, z, zp) - target; };
  double w = 0.5;
  for (int i = 0; i < 60; ++i, w *= 2.0) {
    const double lo = guess - w, hi = guess + w;
    if (g(lo) * g(hi) <= 0.0)
      return solve_bracketed(g, [&](double zp) { return dphi_dzp(x, z, zp); }, lo, hi,
                             1e-11 * (1.0 + std::abs(target)));
  }
  fail(ErrorCode::NoRootInBracket, "first_integral_solve_zprime",
       "no zp with Phi = c near " + num(guess), {x, z});
}

Trajectory integrate_first_order(const FirstIntegral& fi, double x0, double z0, double zp0,
                                 double x1, double tol) {
  double guess = zp0;
  auto rhs = [&](double x, const State<1>& s) -> State<1> {
    guess = fi.solve_zprime_near(x, s[0], guess, fi.constant());
    return {guess};
  };
  IntegratorOptions opt;
  opt.rtol = tol;
  opt.atol = tol;
  Integration<1> run = dopri5<1>(rhs, x0, State<1>{z0}, x1, opt);
  if (run.reason != StopReason::Completed)
    fail(ErrorCode::StepSizeUnderflow, "integrate_first_order",
         "integration stopped near x=" + num(run.steps.back().x), {run.steps.back().x});
  std::vector<Sample> samples;
  for (const auto& st : run.steps) {
    const double zp = st.dy[0];
    const Env env = env3(st.x, st.y[0], zp);
    const double zpp = -(evaluate(fi.a1_, env) * zp + evaluate(fi.a0_, env)) / evaluate(fi.a2_, env);
    samples.push_back({st.x, st.y[0], zp, zpp});
  }
  if (x1 < x0) std::reverse(samples.begin(), samples.end());
  return Trajectory(std::move(samples), "dopri5 (first-order reduced)", tol, run.accepted,
                    run.rejected, run.reason);
}

}  // namespace secord
