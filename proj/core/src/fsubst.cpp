#include "secord/fsubst.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "secord/error.hpp"
#include "secord/numerics.hpp"

namespace secord {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(ErrorCode code, const std::string& op, const std::string& msg,
                       std::vector<double> point = {}) {
  throw Error(code, "f-subst", op, msg, std::move(point));
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string coef(double c, const std::string& what, bool first) {
  if (c == 0.0) return "";
  std::string s = first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
  const double a = std::abs(c);
  if (a != 1.0) s += num(a) + "*";
  return s + what;
}

FSpec resolve_branch(FSpec f, const std::optional<InitialConditions>& ics) {
  if (f.kind != FKind::HalfSquare || f.branch != Branch::Unspecified) return f;
  if (!ics)
    fail(ErrorCode::BranchRequired, "apply_substitution",
         "z = y^2/2 needs a branch: give one or supply initial conditions");
  if (ics->y > 0.0) {
    f.branch = Branch::Positive;
  } else if (ics->y < 0.0) {
    f.branch = Branch::Negative;
  } else {
    fail(ErrorCode::BranchRequired, "apply_substitution",
         "initial value y = 0 does not select a branch of y^2/2", {ics->x});
  }
  return f;
}

// Bounded window of the branch interval for sampling.
Interval sample_window(const FSpec& f) {
  const Interval b = f.branch_interval();
  double lo = std::isfinite(b.lo) ? b.lo : -2.0;
  double hi = std::isfinite(b.hi) ? b.hi : 2.0;
  if (!std::isfinite(b.lo) && std::isfinite(b.hi)) lo = b.hi - 2.0;
  if (std::isfinite(b.lo) && !std::isfinite(b.hi)) hi = b.lo + 2.0;
  const double pad = 0.05 * (hi - lo);
  return {lo + pad, hi - pad};
}

}  // namespace

std::string_view to_string(FKind k) {
  switch (k) {
    case FKind::ExpY: return "exp_y";
    case FKind::HalfSquare: return "half_square";
    case FKind::Custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Unspecified: return "unspecified";
    case Branch::Positive: return "positive";
    case Branch::Negative: return "negative";
  }
  return "unknown";
}

FSpec FSpec::exp_y() { return FSpec{}; }

FSpec FSpec::half_square(Branch b) {
  FSpec f;
  f.kind = FKind::HalfSquare;
  f.branch = b;
  return f;
}

FSpec FSpec::custom_f(Expr f, Interval monotone) {
  FSpec s;
  s.kind = FKind::Custom;
  s.custom = std::move(f);
  s.interval = monotone;
  return s;
}

Dual2 FSpec::derivs(double y) const {
  switch (kind) {
    case FKind::ExpY: {
      const double e = std::exp(y);
      return {e, e, e};
    }
    case FKind::HalfSquare: return {0.5 * y * y, y, 1.0};
    case FKind::Custom: return differentiate(custom, "y", Env{{"y", y}});
  }
  return {};
}

Dual2 FSpec::compose(const Dual2& y) const {
  const Dual2 d = derivs(y.value);
  return chain(y, d.value, d.d1, d.d2);
}

Interval FSpec::branch_interval() const {
  if (kind == FKind::HalfSquare) {
    if (branch == Branch::Positive) return {0.0, kInf};
    if (branch == Branch::Negative) return {-kInf, 0.0};
    fail(ErrorCode::BranchRequired, "invert_f", "z = y^2/2 needs a branch selector");
  }
  return interval;
}

Interval FSpec::range() const {
  switch (kind) {
    case FKind::ExpY: return {0.0, kInf};
    case FKind::HalfSquare: return {0.0, kInf};
    case FKind::Custom: {
      const double a = (*this)(interval.lo), b = (*this)(interval.hi);
      return {std::min(a, b), std::max(a, b)};
    }
  }
  return {};
}

std::string FSpec::text() const {
  switch (kind) {
    case FKind::ExpY: return "exp(y)";
    case FKind::HalfSquare: return "y^2/2";
    case FKind::Custom: return custom.to_string();
  }
  return "";
}

void FSpec::validate() const {
  if (kind != FKind::Custom) return;
  for (const auto& v : custom.variables())
    if (v != "y") fail(ErrorCode::InvalidInput, "fspec", "f must depend on y only");
  if (!std::isfinite(interval.lo) || !std::isfinite(interval.hi) || !(interval.lo < interval.hi))
    fail(ErrorCode::InvalidInput, "fspec", "custom f needs a finite monotone interval");
  double sign = 0.0;
  for (double y : chebyshev_points(interval.lo, interval.hi, 64)) {
    const double d = derivs(y).d1;
    if (d == 0.0 || !std::isfinite(d) || (sign != 0.0 && d * sign < 0.0))
      fail(ErrorCode::InvalidInput, "fspec",
           "f is not strictly monotone on the declared interval near y=" + num(y), {y});
    sign = d;
  }
}

double invert_f(const FSpec& f, double z) {
  switch (f.kind) {
    case FKind::ExpY:
      if (!(z > 0.0)) fail(ErrorCode::OutOfRange, "invert_f", "exp(y) = " + num(z) + " has no solution", {z});
      return std::log(z);
    case FKind::HalfSquare: {
      const Interval b = f.branch_interval();
      if (!(z >= 0.0)) fail(ErrorCode::OutOfRange, "invert_f", "y^2/2 = " + num(z) + " has no solution", {z});
      const double y = std::sqrt(2.0 * z);
      return b.lo == 0.0 ? y : -y;
    }
    case FKind::Custom: {
      const Interval r = f.range();
      if (!(z >= r.lo && z <= r.hi))
        fail(ErrorCode::OutOfRange, "invert_f",
             "z=" + num(z) + " outside the range [" + num(r.lo) + ", " + num(r.hi) + "] of f", {z});
      const double xtol = 1e-14 * std::max({1.0, std::abs(f.interval.lo), std::abs(f.interval.hi)});
      try {
        return solve_bracketed([&](double y) { return f(y) - z; },
                               [&](double y) { return f.derivs(y).d1; }, f.interval.lo,
                               f.interval.hi, 1e-15 * (1.0 + std::abs(z)), xtol);
      } catch (const Error& e) {
        rethrow_in(e, "f-subst", "invert_f");
      }
    }
  }
  return 0.0;
}

Dual2 invert_f_derivs(const FSpec& f, double z) {
  const double y = invert_f(f, z);
  const Dual2 d = f.derivs(y);
  if (d.d1 == 0.0 || !std::isfinite(d.d1))
    fail(ErrorCode::DomainError, "invert_f", "f'(y) vanishes at y=" + num(y), {z});
  const double g1 = 1.0 / d.d1;
  return {y, g1, -d.d2 * g1 * g1 * g1};
}

double substitution_identity_error(const FSpec& f, std::size_t n, unsigned seed) {
  const Interval w = sample_window(f.kind == FKind::HalfSquare && f.branch == Branch::Unspecified
                                       ? FSpec::half_square(Branch::Positive)
                                       : f);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uy(w.lo, w.hi), ud(-3.0, 3.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = uy(rng), yp = ud(rng), ypp = ud(rng);
    const Dual2 z = f.compose(Dual2{y, yp, ypp});
    const Dual2 d = f.derivs(y);
    const double expect = d.d1 * ypp + d.d2 * yp * yp;
    worst = std::max(worst, std::abs(z.d2 - expect) / (1.0 + std::abs(expect)));
  }
  return worst;
}

// ---------------------------------------------------------------- problems

SecondOrderEquation FTypeProblem::synthesized_equation() const {
  const FSpec f = fspec;
  if (const auto* c = std::get_if<FConstantCoeff>(&spec)) {
    const FConstantCoeff cc = *c;
    auto parts = [f, cc](double x, double y, double yp, double ypp) {
      const Dual2 d = f.derivs(y);
      return std::array<double, 5>{cc.a2 * d.d1 * ypp + cc.a2 * d.d2 * yp * yp,
                                   cc.a1 * d.d1 * yp, cc.a0 * d.value, -cc.g(x),
                                   std::abs(cc.a2 * d.d1 * ypp) + std::abs(cc.a2 * d.d2 * yp * yp)};
    };
    std::string text = coef(cc.a2, "(f(y))''", true) + coef(cc.a1, "(f(y))'", false) +
                       coef(cc.a0, "f(y)", false) + " = " +
                       (cc.g.empty() ? std::string("0") : cc.g.to_expr("x").to_string()) +
                       ", f(y) = " + f.text();
    return SecondOrderEquation::from_function(
        [parts](double x, double y, double yp, double ypp) {
          const auto p = parts(x, y, yp, ypp);
          return p[0] + p[1] + p[2] + p[3];
        },
        [parts](double x, double y, double yp, double ypp) {
          const auto p = parts(x, y, yp, ypp);
          return 1.0 + p[4] + std::abs(p[1]) + std::abs(p[2]) + std::abs(p[3]);
        },
        text);
  }
  const FWeighted w = std::get<FWeighted>(spec);
  auto parts = [f, w](double x, double y, double yp, double ypp) {
    const Dual2 d = f.derivs(y);
    const Env env{{"x", x}};
    const double p = evaluate(w.p, env), c1 = evaluate(w.yp_coeff, env);
    return std::array<double, 4>{p * d.d1 * ypp, p * d.d2 * yp * yp, c1 * d.d1 * yp, w.a0 * d.value};
  };
  std::string text = "(" + w.p.to_string() + ")*(f(y))'' + (" + w.yp_coeff.to_string() +
                     ")*(f(y))'" + coef(w.a0, "f(y)", false) + " = 0, f(y) = " + f.text();
  return SecondOrderEquation::from_function(
      [parts](double x, double y, double yp, double ypp) {
        const auto p = parts(x, y, yp, ypp);
        return p[0] + p[1] + p[2] + p[3];
      },
      [parts](double x, double y, double yp, double ypp) {
        const auto p = parts(x, y, yp, ypp);
        return 1.0 + std::abs(p[0]) + std::abs(p[1]) + std::abs(p[2]) + std::abs(p[3]);
      },
      text);
}

SecondOrderEquation FTypeProblem::y_equation() const {
  if (literal_equation) return SecondOrderEquation::from_expr(*literal_equation);
  return synthesized_equation();
}

LinearZProblem apply_substitution(const FTypeProblem& problem) {
  const FSpec f = resolve_branch(problem.fspec, problem.ics);
  f.validate();
  const double ident = substitution_identity_error(f);
  if (!(ident <= 1e-9))
    fail(ErrorCode::StructureMismatch, "apply_substitution",
         "z'' = f'(y) y'' + f''(y) y'^2 fails by " + num(ident));

  FTypeProblem resolved = problem;
  resolved.fspec = f;
  if (problem.literal_equation) {
    const SecondOrderEquation lit = SecondOrderEquation::from_expr(*problem.literal_equation);
    const SecondOrderEquation syn = resolved.synthesized_equation();
    const Interval win = sample_window(f);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uy(win.lo, win.hi), ud(-1.5, 1.5);
    const auto xs = chebyshev_points(problem.domain.lo, problem.domain.hi, 64);
    std::size_t evaluated = 0;
    for (double x : xs) {
      const double y = uy(rng), yp = ud(rng);
      double A = 0, B = 0, C = 0, D = 0;
      try {
        std::tie(A, B) = lit.affine(x, y, yp);
        std::tie(C, D) = syn.affine(x, y, yp);
      } catch (const Error&) {
        continue;
      }
      ++evaluated;
      const double cross = A * D - B * C;
      const double scale = std::abs(A * D) + std::abs(B * C) + 1e-300;
      if (C == 0.0 || A == 0.0 || std::abs(cross) > 1e-9 * std::max(scale, 1e-12 * (A * A + C * C)))
        fail(ErrorCode::StructureMismatch, "apply_substitution",
             "equation is not the f-type form for f(y) = " + f.text() + " at (x, y, yp) = (" +
                 num(x) + ", " + num(y) + ", " + num(yp) + ")",
             {x, y, yp});
    }
    if (evaluated * 2 < xs.size())
      fail(ErrorCode::StructureMismatch, "apply_substitution",
           "equation not evaluable at enough sample points");
  }

  LinearZProblem out;
  out.fspec = f;
  if (problem.ics) {
    const auto& ic = *problem.ics;
    const Dual2 d = f.derivs(ic.y);
    out.ics = InitialConditions{ic.x, d.value, d.d1 * ic.yp};
  }
  if (const auto* c = std::get_if<FConstantCoeff>(&problem.spec)) {
    if (c->a2 == 0.0)
      fail(ErrorCode::LeadingCoefficientVanished, "apply_substitution", "a2 must be nonzero");
    out.form = solve_general_cc(c->a1 / c->a2, c->a0 / c->a2, c->g.scaled(1.0 / c->a2), "x");
    out.text = coef(c->a2, "z_xx", true) + coef(c->a1, "z_x", false) + coef(c->a0, "z", false) +
               " = " + (c->g.empty() ? std::string("0") : c->g.to_expr("x").to_string());
  } else {
    const auto& w = std::get<FWeighted>(problem.spec);
    OdeProblem z;
    z.spec = ChebyshevSpec{w.p, w.yp_coeff, Expr(w.a0) * Expr::variable("y")};
    z.domain = problem.domain;
    z.x0 = problem.x0;
    z.ics = out.ics;
    out.form = z;
    out.text = "(" + w.p.to_string() + ")*z_xx + (" + w.yp_coeff.to_string() + ")*z_x" +
               coef(w.a0, "z", false) + " = 0";
  }
  return out;
}

FTypeSolution solve_f_type(const FTypeProblem& problem, double tol) {
  FTypeSolution out;
  out.linear = apply_substitution(problem);
  const FSpec f = out.linear.fspec;

  if (const auto* g = std::get_if<GeneralSolution>(&out.linear.form)) {
    std::vector<Expr> zs;
    if (out.linear.ics) {
      const auto& ic = *out.linear.ics;
      zs.push_back(apply_initial_conditions(*g, ic.x, ic.y, ic.yp).y);
    } else if (problem.coefficients) {
      zs.push_back(g->combine((*problem.coefficients)[0], (*problem.coefficients)[1]));
    } else {
      zs.push_back(g->combine(1.0, 0.0));
      zs.push_back(g->combine(0.0, 1.0));
      out.notes.push_back("no initial conditions or constants: using each basis member");
    }
    for (const auto& z : zs) out.z.push_back(ClosedForm::from_expr(z, "x", problem.domain));
  } else {
    const auto& zp = std::get<OdeProblem>(out.linear.form);
    SolveOptions so;
    so.coefficients = problem.coefficients;
    SolveOutcome r = solve_reduced(reduce_problem(zp, tol), so);
    out.z = std::move(r.solutions);
    for (auto& n : r.notes) out.notes.push_back(std::move(n));
  }

  const Interval r = f.range();
  for (const auto& zc : out.z) {
    const Interval v = zc.valid;
    double anchor = problem.ics ? problem.ics->x : problem.x0 ? *problem.x0 : 0.5 * (v.lo + v.hi);
    anchor = std::clamp(anchor, v.lo, v.hi);
    // -1: out of range, 0: not evaluable, 1: in range
    auto state = [&](double x) {
      double z = 0.0;
      try {
        z = zc(x);
      } catch (const Error&) {
        return 0;
      }
      return (std::isfinite(z) && z > r.lo && z < r.hi) ? 1 : -1;
    };
    if (state(anchor) != 1)
      fail(ErrorCode::RangeViolation, "solve_f_type",
           "z leaves the range of f at the anchor x=" + num(anchor), {anchor});
    constexpr int kScan = 2048;
    const double step = (v.hi - v.lo) / kScan;
    auto cut = [&](double dir) -> std::optional<double> {
      double good = anchor;
      for (;;) {
        double next = good + dir * step;
        if (dir > 0 ? next >= v.hi : next <= v.lo) next = dir > 0 ? v.hi : v.lo;
        if (state(next) == -1) {
          double a = good, b = next;
          for (int i = 0; i < 200 && std::abs(b - a) > 1e-14 * (v.hi - v.lo); ++i) {
            const double m = 0.5 * (a + b);
            (state(m) == -1 ? b : a) = m;
          }
          return a;
        }
        if (next == (dir > 0 ? v.hi : v.lo)) return std::nullopt;
        good = next;
      }
    };
    ClosedForm y = zc;
    const auto lo_cut = cut(-1.0);
    const auto hi_cut = cut(1.0);
    if (lo_cut) {
      out.range_violations.push_back({v.lo, *lo_cut});
      y.valid.lo = *lo_cut;
      y.singular_lo = true;
      y.notes.push_back("z leaves the range of f below x=" + num(*lo_cut));
    }
    if (hi_cut) {
      out.range_violations.push_back({*hi_cut, v.hi});
      y.valid.hi = *hi_cut;
      y.singular_hi = true;
      y.notes.push_back("z leaves the range of f above x=" + num(*hi_cut));
    }
    y.set_outer({"y = f^-1(z), f(y) = " + f.text() +
                     (f.kind == FKind::HalfSquare ? ", branch " + std::string(to_string(f.branch)) : ""),
                 [f](double z) { return invert_f_derivs(f, z); }});
    out.y.push_back(std::move(y));
  }
  return out;
}

}  // namespace secord
