#include "secord/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "secord/error.hpp"
#include "secord/numerics.hpp"

namespace secord {
namespace {

constexpr int kGeometricKnots = 20;

[[noreturn]] void fail(ErrorCode code, const std::string& op, const std::string& msg,
                       std::vector<double> point = {}) {
  throw Error(code, "reduction", op, msg, std::move(point));
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

bool positive_at(const Expr& w, double x) {
  try {
    const double v = evaluate(w, Env{{"x", x}});
    return std::isfinite(v) && v > 0.0;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::string_view to_string(OdeClass c) {
  switch (c) {
    case OdeClass::ChebyshevType: return "chebyshev_type";
    case OdeClass::LinearWeighted: return "linear_weighted";
    case OdeClass::FType: return "f_type";
    case OdeClass::QuasiLinear: return "quasilinear";
  }
  return "unknown";
}

// ---------------------------------------------------------------- TransformMap

double TransformMap::weight(double x) const { return evaluate(w_, Env{{"x", x}}); }

Dual2 TransformMap::weight_jet(double x) const { return differentiate(w_, "x", Env{{"x", x}}); }

double TransformMap::local_integral(double from, double to) const {
  if (from == to) return 0.0;
  auto g = [this](double x) { return 1.0 / weight(x); };
  return adaptive_simpson(g, from, to, std::min(tol_, 1e-13) * 1e-1, 50).value;
}

TransformMap TransformMap::build(const Expr& weight, WeightMode mode, Interval domain, double x0,
                                 double tol) {
  if (!(domain.lo < domain.hi) || !std::isfinite(domain.lo) || !std::isfinite(domain.hi))
    fail(ErrorCode::InvalidInput, "build_transform", "domain must satisfy a < b");
  if (!domain.contains(x0))
    fail(ErrorCode::OutOfRange, "build_transform",
         "x0=" + num(x0) + " outside [" + num(domain.lo) + ", " + num(domain.hi) + "]", {x0});

  TransformMap m;
  m.mode_ = mode;
  m.w_ = mode == WeightMode::SqrtP ? call(Fn::Sqrt, weight) : weight;
  m.domain_ = domain;
  m.x0_ = x0;
  m.tol_ = tol;

  // positivity on interior samples; for sqrt mode test p itself so a
  // negative p is reported as such rather than as a sqrt domain error
  for (double x : chebyshev_points(domain.lo, domain.hi, 64)) {
    double v = 0.0;
    try {
      v = evaluate(weight, Env{{"x", x}});
    } catch (const Error& e) {
      fail(ErrorCode::NonPositiveWeight, "build_transform",
           "weight not evaluable at x=" + num(x) + ": " + e.what(), {x});
    }
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::NonPositiveWeight, "build_transform",
           "weight " + num(v) + " is not positive at x=" + num(x), {x});
  }
  m.singular_lo_ = !positive_at(m.w_, domain.lo);
  m.singular_hi_ = !positive_at(m.w_, domain.hi);

  const double L = domain.length();
  const double h = L / static_cast<double>(kMinSegments);
  std::vector<double> xs;
  if (m.singular_lo_) {
    for (int j = kGeometricKnots; j >= 1; --j) xs.push_back(domain.lo + h * std::ldexp(1.0, -j));
  }
  for (std::size_t k = 0; k <= kMinSegments; ++k) {
    if (k == 0 && m.singular_lo_) continue;
    if (k == kMinSegments && m.singular_hi_) continue;
    xs.push_back(k == kMinSegments ? domain.hi : domain.lo + h * static_cast<double>(k));
  }
  if (m.singular_hi_) {
    for (int j = 1; j <= kGeometricKnots; ++j) xs.push_back(domain.hi - h * std::ldexp(1.0, -j));
  }
  const bool anchor_lo = m.singular_lo_ && x0 == domain.lo;
  const bool anchor_hi = m.singular_hi_ && x0 == domain.hi;
  if (!anchor_lo && !anchor_hi) xs.push_back(x0);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  m.xs_ = xs;

  auto g = [&m](double x) { return 1.0 / m.weight(x); };
  const std::size_t n = xs.size();
  std::vector<double> ts(n, 0.0);
  try {
    if (anchor_lo) {
      ts[0] = improper_integral(g, domain.lo, xs[0], tol * 1e-2).value;
      for (std::size_t i = 1; i < n; ++i) ts[i] = ts[i - 1] + m.local_integral(xs[i - 1], xs[i]);
    } else if (anchor_hi) {
      ts[n - 1] = improper_integral(g, domain.hi, xs[n - 1], tol * 1e-2).value;
      for (std::size_t i = n - 1; i-- > 0;) ts[i] = ts[i + 1] - m.local_integral(xs[i], xs[i + 1]);
    } else {
      const auto i0 = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x0) - xs.begin());
      ts[i0] = 0.0;
      for (std::size_t i = i0 + 1; i < n; ++i) ts[i] = ts[i - 1] + m.local_integral(xs[i - 1], xs[i]);
      for (std::size_t i = i0; i-- > 0;) ts[i] = ts[i + 1] - m.local_integral(xs[i], xs[i + 1]);
    }
  } catch (const Error& e) {
    rethrow_in(e, "reduction", "build_transform");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(ts[i] > ts[i - 1]))
      fail(ErrorCode::NonPositiveWeight, "build_transform",
           "transform not strictly increasing near x=" + num(xs[i]), {xs[i]});
  }
  m.ts_ = ts;

  auto endpoint = [&](double end, double knot) -> double {
    try {
      return improper_integral(g, end, knot, tol * 1e-2).value;
    } catch (const Error& e) {
      fail(ErrorCode::DivergentIntegral, "build_transform",
           "integral of 1/w diverges at endpoint x=" + num(end) + ": " + e.what(), {end});
    }
  };
  if (!m.singular_lo_) {
    m.t_lo_ = ts.front();
  } else if (anchor_lo) {
    m.t_lo_ = 0.0;
  } else {
    m.t_lo_ = ts.front() - endpoint(domain.lo, xs.front());
  }
  if (!m.singular_hi_) {
    m.t_hi_ = ts.back();
  } else if (anchor_hi) {
    m.t_hi_ = 0.0;
  } else {
    m.t_hi_ = ts.back() - endpoint(domain.hi, xs.back());
  }

  m.slopes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.slopes_[i] = g(xs[i]);

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(xs.front(), xs.back());
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double x = u(rng);
    worst = std::max(worst, std::abs(m.interpolate(x) - m(x)));
  }
  m.interp_error_ = worst;
  return m;
}

std::size_t TransformMap::segment(double x) const {
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  if (it == xs_.begin()) return 0;
  auto k = static_cast<std::size_t>(it - xs_.begin()) - 1;
  return std::min(k, xs_.size() - 2);
}

double TransformMap::operator()(double x) const {
  const double slack = 1e-14 * std::max(1.0, domain_.length());
  if (!(x >= domain_.lo - slack && x <= domain_.hi + slack))
    fail(ErrorCode::OutOfRange, "transform",
         "x=" + num(x) + " outside [" + num(domain_.lo) + ", " + num(domain_.hi) + "]", {x});
  x = std::clamp(x, domain_.lo, domain_.hi);
  if (x < xs_.front()) {
    if (x == domain_.lo) return t_lo_;
    auto g = [this](double s) { return 1.0 / weight(s); };
    return ts_.front() - improper_integral(g, domain_.lo, xs_.front(), tol_ * 1e-2).value +
           improper_integral(g, domain_.lo, x, tol_ * 1e-2).value;
  }
  if (x > xs_.back()) {
    if (x == domain_.hi) return t_hi_;
    auto g = [this](double s) { return 1.0 / weight(s); };
    return ts_.back() - improper_integral(g, domain_.hi, xs_.back(), tol_ * 1e-2).value +
           improper_integral(g, domain_.hi, x, tol_ * 1e-2).value;
  }
  const std::size_t k = segment(x);
  const double a = xs_[k], b = xs_[k + 1];
  if (x - a <= b - x) return ts_[k] + local_integral(a, x);
  return ts_[k + 1] - local_integral(x, b);
}

double TransformMap::interpolate(double x) const {
  if (x <= xs_.front() || x >= xs_.back()) return (*this)(x);
  const std::size_t k = segment(x);
  const double a = xs_[k], b = xs_[k + 1], h = b - a;
  const double s = (x - a) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * ts_[k] + (s3 - 2 * s2 + s) * h * slopes_[k] +
         (-2 * s3 + 3 * s2) * ts_[k + 1] + (s3 - s2) * h * slopes_[k + 1];
}

Dual2 TransformMap::jet(double x) const {
  const Dual2 w = weight_jet(x);
  if (w.value == 0.0)
    fail(ErrorCode::DivisionByZero, "transform", "weight vanishes at x=" + num(x), {x});
  return {(*this)(x), 1.0 / w.value, -w.d1 / (w.value * w.value)};
}

double TransformMap::invert(double t) const {
  const double slack = 1e-12 * (1.0 + std::abs(t));
  if (!(t >= t_lo_ - slack && t <= t_hi_ + slack))
    fail(ErrorCode::OutOfRange, "invert_transform",
         "t=" + num(t) + " outside [" + num(t_lo_) + ", " + num(t_hi_) + "]", {t});
  if (t <= t_lo_) return domain_.lo;
  if (t >= t_hi_) return domain_.hi;
  double lo = domain_.lo, hi = domain_.hi;
  if (t < ts_.front()) {
    hi = xs_.front();
  } else if (t > ts_.back()) {
    lo = xs_.back();
  } else {
    auto it = std::lower_bound(ts_.begin(), ts_.end(), t);
    const auto k = static_cast<std::size_t>(it - ts_.begin());
    if (ts_[k] == t) return xs_[k];
    lo = xs_[k - 1];
    hi = xs_[k];
  }
  auto f = [&](double x) { return (*this)(x) - t; };
  auto df = [&](double x) {
    try {
      return 1.0 / weight(x);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  try {
    return solve_bracketed(f, df, lo, hi, 1e-13 * (1.0 + std::abs(t)), 0.0);
  } catch (const Error& e) {
    rethrow_in(e, "reduction", "invert_transform");
  }
}

// ---------------------------------------------------------------- problems

double OdeProblem::anchor() const {
  if (x0) return *x0;
  if (ics) return ics->x;
  return 0.5 * (domain.lo + domain.hi);
}

Expr OdeProblem::equation() const {
  const Expr y = Expr::variable("y"), yp = Expr::variable("yp"), ypp = Expr::variable("ypp");
  if (const auto* c = std::get_if<ChebyshevSpec>(&spec)) {
    const Expr v = call(Fn::Sqrt, c->p) * yp;
    return c->p * ypp + c->yp_coeff * yp + c->f.substitute("v", v);
  }
  const auto& l = std::get<LinearWeightedSpec>(spec);
  Expr e = pow(l.P, Expr(2.0)) * ypp + l.yp_coeff * yp + Expr(l.beta) * y;
  if (!(l.h.is_constant() && l.h.constant_value() == 0.0)) e = e - l.h;
  return e;
}

bool ReducedOde::depends_on_velocity() const {
  if (form == Form::LinearCC) return alpha != 0.0;
  return f.depends_on("v");
}

std::string ReducedOde::text() const {
  if (form == Form::Autonomous) {
    const Expr g = f.substitute("v", Expr::variable("y_t"));
    if (g.is_constant() && g.constant_value() == 0.0) return "y_tt = 0";
    std::string s = g.to_string();
    if (!s.empty() && s[0] == '-') return "y_tt - " + s.substr(1) + " = 0";
    return "y_tt + " + s + " = 0";
  }
  std::string s = "y_tt";
  auto term = [&s](double c, const char* var) {
    if (c == 0.0) return;
    s += c < 0 ? " - " : " + ";
    const double a = std::abs(c);
    if (a != 1.0) s += num(a) + "*";
    s += var;
  };
  term(alpha, "y_t");
  term(beta, "y");
  s += " = " + (forcing.empty() ? std::string("0") : forcing.to_expr("t").to_string());
  return s;
}

void check_pattern(const std::function<double(double)>& actual,
                   const std::function<double(double)>& expected, Interval domain,
                   const std::string& what, double rtol) {
  std::size_t evaluated = 0;
  const auto pts = chebyshev_points(domain.lo, domain.hi, 32);
  for (double x : pts) {
    double a = 0.0, e = 0.0;
    try {
      a = actual(x);
      e = expected(x);
    } catch (const Error&) {
      continue;
    }
    ++evaluated;
    const double scale = std::max({1.0, std::abs(a), std::abs(e)});
    if (!(std::abs(a - e) <= rtol * scale))
      fail(ErrorCode::StructureMismatch, "reduce_problem",
           what + ": coefficient " + num(a) + " differs from required " + num(e) + " at x=" + num(x),
           {x});
  }
  if (evaluated * 2 < pts.size())
    fail(ErrorCode::StructureMismatch, "reduce_problem",
         what + ": coefficients not evaluable on the domain");
}

namespace {

struct AffineFit {
  bool affine = false;
  double alpha = 0.0;  // df/dv
  double beta = 0.0;   // df/dy
  double c0 = 0.0;     // f(0, 0)
};

// f(v, y) affine in both arguments, judged at a fixed sample set.
AffineFit affine_in_vy(const Expr& f) {
  AffineFit fit;
  for (const auto& var : f.variables()) {
    if (var != "v" && var != "y") return fit;
  }
  static const double pts[][2] = {{0.3, -0.7}, {-1.1, 0.4}, {0.9, 1.3}, {-0.5, -1.6},
                                  {1.7, 0.2},  {0.1, 2.1},  {-1.9, -0.3}, {0.6, 0.8}};
  bool first = true;
  try {
    fit.c0 = evaluate(f, Env{{"v", 0.0}, {"y", 0.0}});
    for (const auto& p : pts) {
      const Env env{{"v", p[0]}, {"y", p[1]}};
      const Dual2 dv = differentiate(f, "v", env);
      const Dual2 dy = differentiate(f, "y", env);
      const Dual2 diag = evaluate_jet(f, JetEnv{{"v", Dual2{p[0], 1.0, 0.0}},
                                                 {"y", Dual2{p[1], 1.0, 0.0}}});
      const double sc = 1.0 + std::abs(dv.value);
      if (std::abs(dv.d2) > 1e-12 * sc || std::abs(dy.d2) > 1e-12 * sc ||
          std::abs(diag.d2) > 1e-12 * sc)
        return fit;
      if (first) {
        fit.alpha = dv.d1;
        fit.beta = dy.d1;
        first = false;
      } else if (std::abs(dv.d1 - fit.alpha) > 1e-12 * (1 + std::abs(fit.alpha)) ||
                 std::abs(dy.d1 - fit.beta) > 1e-12 * (1 + std::abs(fit.beta))) {
        return fit;
      }
      const double lin = fit.c0 + fit.alpha * p[0] + fit.beta * p[1];
      if (std::abs(dv.value - lin) > 1e-12 * (1 + std::abs(lin))) return fit;
    }
  } catch (const Error&) {
    return fit;
  }
  fit.affine = true;
  return fit;
}

}  // namespace

ReducedOde reduce_problem(const OdeProblem& problem, double tol) {
  const Interval dom = problem.domain;
  if (problem.ics && !dom.contains(problem.ics->x))
    fail(ErrorCode::OutOfRange, "reduce_problem",
         "initial abscissa " + num(problem.ics->x) + " outside the domain", {problem.ics->x});
  const double x0 = problem.anchor();
  ReducedOde out;

  if (const auto* c = std::get_if<ChebyshevSpec>(&problem.spec)) {
    for (const auto& var : c->p.variables())
      if (var != "x") fail(ErrorCode::InvalidInput, "reduce_problem", "p must depend on x only");
    for (const auto& var : c->f.variables())
      if (var != "v" && var != "y")
        fail(ErrorCode::StructureMismatch, "reduce_problem",
             "f must depend on v and y only (found '" + var + "')");
    check_pattern(
        [&](double x) { return evaluate(c->yp_coeff, Env{{"x", x}}); },
        [&](double x) { return 0.5 * differentiate(c->p, "x", Env{{"x", x}}).d1; }, dom,
        "y' coefficient vs p'/2");
    out.tmap = std::make_shared<const TransformMap>(
        TransformMap::build(c->p, WeightMode::SqrtP, dom, x0, tol));
    const AffineFit fit = affine_in_vy(c->f);
    if (fit.affine) {
      out.form = ReducedOde::Form::LinearCC;
      out.alpha = fit.alpha;
      out.beta = fit.beta;
      if (fit.c0 != 0.0) out.forcing = ForcingSpec::constant(-fit.c0);
    } else {
      out.form = ReducedOde::Form::Autonomous;
    }
    out.f = c->f;
  } else {
    const auto& l = std::get<LinearWeightedSpec>(problem.spec);
    check_pattern(
        [&](double x) { return evaluate(l.yp_coeff, Env{{"x", x}}); },
        [&](double x) {
          const Dual2 P = differentiate(l.P, "x", Env{{"x", x}});
          return P.value * (l.alpha + P.d1);
        },
        dom, "y' coefficient vs P(alpha + P')");
    out.tmap = std::make_shared<const TransformMap>(
        TransformMap::build(l.P, WeightMode::DirectP, dom, x0, tol));
    const bool has_h = !(l.h.is_constant() && l.h.constant_value() == 0.0);
    if (has_h && l.forcing.empty())
      fail(ErrorCode::StructureMismatch, "reduce_problem",
           "forcing h(x) given without its t-form H(t)");
    if (!l.forcing.empty()) {
      for (double x : chebyshev_points(dom.lo, dom.hi, 16)) {
        double hx = 0.0;
        try {
          hx = evaluate(l.h, Env{{"x", x}});
        } catch (const Error&) {
          continue;
        }
        const double Ht = l.forcing((*out.tmap)(x));
        if (std::abs(Ht - hx) > 1e-8 * std::max({1.0, std::abs(hx), std::abs(Ht)}))
          fail(ErrorCode::StructureMismatch, "reduce_problem",
               "H(t(x)) = " + num(Ht) + " differs from h(x) = " + num(hx) + " at x=" + num(x),
               {x});
      }
    }
    out.form = ReducedOde::Form::LinearCC;
    out.alpha = l.alpha;
    out.beta = l.beta;
    out.forcing = l.forcing;
    Expr f = Expr(l.alpha) * Expr::variable("v") + Expr(l.beta) * Expr::variable("y");
    out.f = f;
  }

  if (problem.ics) {
    const auto& ic = *problem.ics;
    const double w = out.tmap->weight(ic.x);
    out.ics = TransformedIcs{(*out.tmap)(ic.x), ic.y, w * ic.yp};
  }
  return out;
}

// ---------------------------------------------------------------- energy

EnergyIntegral::EnergyIntegral(Expr f_of_y, double y0, double v0)
    : f_(std::move(f_of_y)), y0_(y0), c_(v0 * v0), sign_(1.0) {
  for (const auto& var : f_.variables())
    if (var != "y")
      fail(ErrorCode::InvalidInput, "energy_first_integral",
           "f must depend on y only (found '" + var + "')");
  if (v0 > 0.0) {
    sign_ = 1.0;
  } else if (v0 < 0.0) {
    sign_ = -1.0;
  } else {
    const double a = -evaluate(f_, Env{{"y", y0}});
    sign_ = a < 0.0 ? -1.0 : 1.0;
  }
}

double EnergyIntegral::antiderivative(double y) const {
  auto f = [this](double s) { return evaluate(f_, Env{{"y", s}}); };
  return adaptive_simpson(f, y0_, y, 1e-12).value;
}

double EnergyIntegral::velocity(double y) const {
  double r = velocity_squared(y);
  if (r < 0.0) {
    if (r > -1e-12 * (1.0 + c_)) {
      r = 0.0;
    } else {
      fail(ErrorCode::NegativeRadicand, "energy_first_integral",
           "c - 2F(y) = " + num(r) + " < 0 at y=" + num(y), {y});
    }
  }
  return sign_ * std::sqrt(r);
}

EnergyIntegral energy_first_integral(const Expr& f_of_y, double y0, double v0) {
  return EnergyIntegral(f_of_y, y0, v0);
}

}  // namespace secord
