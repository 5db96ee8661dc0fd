#include "secord/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "secord/error.hpp"
#include "secord/numerics.hpp"

namespace secord {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(ErrorCode code, const std::string& op, const std::string& msg,
                       std::vector<double> point = {}) {
  throw Error(code, "closed-form", op, msg, std::move(point));
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// e^{at} (P(t) cos bt + Q(t) sin bt)
struct PolyPair {
  std::vector<double> P;
  std::vector<double> Q;
};

std::vector<double> poly_derivative(const std::vector<double>& p) {
  std::vector<double> d(p.size() > 1 ? p.size() - 1 : 0);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
  return d;
}

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
  if (y.size() < x.size()) y.resize(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

PolyPair derivative(const PolyPair& f, double a, double b) {
  PolyPair out;
  axpy(out.P, a, f.P);
  axpy(out.P, 1.0, poly_derivative(f.P));
  axpy(out.P, b, f.Q);
  axpy(out.Q, a, f.Q);
  axpy(out.Q, 1.0, poly_derivative(f.Q));
  axpy(out.Q, -b, f.P);
  return out;
}

PolyPair apply_operator(const PolyPair& f, double a, double b, double alpha, double beta) {
  const PolyPair d1 = derivative(f, a, b);
  const PolyPair d2 = derivative(d1, a, b);
  PolyPair out;
  axpy(out.P, 1.0, d2.P);
  axpy(out.Q, 1.0, d2.Q);
  axpy(out.P, alpha, d1.P);
  axpy(out.Q, alpha, d1.Q);
  axpy(out.P, beta, f.P);
  axpy(out.Q, beta, f.Q);
  return out;
}

double coeff(const std::vector<double>& p, std::size_t i) { return i < p.size() ? p[i] : 0.0; }

// Least squares through normal equations with partial pivoting; the
// systems here have at most six unknowns.
std::vector<double> least_squares(const std::vector<std::vector<double>>& A,
                                  const std::vector<double>& rhs) {
  const std::size_t n = A.empty() ? 0 : A[0].size();
  std::vector<std::vector<double>> M(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r < A.size(); ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) M[i][j] += A[r][i] * A[r][j];
      M[i][n] += A[r][i] * rhs[r];
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
    if (std::abs(M[piv][c]) < 1e-300)
      fail(ErrorCode::InternalVerificationFailed, "solve_particular_cc",
           "singular undetermined-coefficient system");
    std::swap(M[c], M[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = M[r][c] / M[c][c];
      for (std::size_t j = c; j <= n; ++j) M[r][j] -= f * M[c][j];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = M[i][n] / M[i][i];
  return x;
}

}  // namespace

std::string_view to_string(Basis::Kind k) {
  switch (k) {
    case Basis::Kind::DistinctReal: return "distinct_real";
    case Basis::Kind::DoubleRoot: return "double_root";
    case Basis::Kind::Complex: return "complex";
  }
  return "unknown";
}

Basis solve_homogeneous_cc(double alpha, double beta, std::string_view var) {
  Basis b;
  const double disc = alpha * alpha - 4.0 * beta;
  const double scale = alpha * alpha + 4.0 * std::abs(beta);
  if (std::abs(disc) <= 1e-12 * scale) {
    b.kind = Basis::Kind::DoubleRoot;
    b.r1 = b.r2 = -0.5 * alpha;
    b.y1 = term_expr(1.0, 0, b.r1, 0.0, Oscillation::None, var);
    b.y2 = term_expr(1.0, 1, b.r1, 0.0, Oscillation::None, var);
  } else if (disc > 0.0) {
    b.kind = Basis::Kind::DistinctReal;
    // stable root pair
    const double q = -0.5 * (alpha + std::copysign(std::sqrt(disc), alpha == 0.0 ? 1.0 : alpha));
    double r1 = q, r2 = q != 0.0 ? beta / q : 0.0;
    if (r1 > r2) std::swap(r1, r2);
    b.r1 = r1;
    b.r2 = r2;
    b.y1 = term_expr(1.0, 0, r1, 0.0, Oscillation::None, var);
    b.y2 = term_expr(1.0, 0, r2, 0.0, Oscillation::None, var);
  } else {
    b.kind = Basis::Kind::Complex;
    b.r1 = -0.5 * alpha;
    b.r2 = 0.5 * std::sqrt(-disc);
    b.y1 = term_expr(1.0, 0, b.r1, b.r2, Oscillation::Cos, var);
    b.y2 = term_expr(1.0, 0, b.r1, b.r2, Oscillation::Sin, var);
  }
  return b;
}

int resonance_multiplicity(double alpha, double beta, double rate, double frequency) {
  // p(lambda) = lambda^2 + alpha lambda + beta at lambda = a + ib
  const double a = rate, b = frequency;
  const double re = a * a - b * b + alpha * a + beta;
  const double im = 2.0 * a * b + alpha * b;
  const double mag2 = a * a + b * b;
  const double tol = 1e-12 * (1.0 + mag2 + std::abs(alpha) * std::sqrt(mag2) + std::abs(beta));
  if (std::hypot(re, im) > tol) return 0;
  // p'(lambda) = 2 lambda + alpha
  const double dre = 2.0 * a + alpha, dim = 2.0 * b;
  if (std::hypot(dre, dim) > 1e-12 * (1.0 + std::sqrt(mag2) + std::abs(alpha))) return 1;
  return 2;
}

Expr solve_particular_cc(double alpha, double beta, const ForcingSpec& forcing,
                         std::string_view var) {
  // group by (rate, frequency)
  std::map<std::pair<double, double>, std::vector<ForcingTerm>> groups;
  for (const auto& t : forcing.terms()) groups[{t.rate, t.frequency}].push_back(t);

  std::vector<Expr> parts;
  for (const auto& [key, terms] : groups) {
    const auto [a, b] = key;
    int k = 0;
    for (const auto& t : terms) k = std::max(k, t.power);
    const int s = resonance_multiplicity(alpha, beta, a, b);
    const bool osc = b != 0.0;
    const std::size_t unknowns = static_cast<std::size_t>(k + 1) * (osc ? 2 : 1);
    const std::size_t degrees = static_cast<std::size_t>(k + s + 1);

    std::vector<PolyPair> images;
    for (int j = 0; j <= k; ++j) {
      PolyPair f;
      f.P.assign(static_cast<std::size_t>(s + j + 1), 0.0);
      f.P.back() = 1.0;
      images.push_back(apply_operator(f, a, b, alpha, beta));
      if (osc) {
        PolyPair g;
        g.Q.assign(static_cast<std::size_t>(s + j + 1), 0.0);
        g.Q.back() = 1.0;
        images.push_back(apply_operator(g, a, b, alpha, beta));
      }
    }
    PolyPair target;
    target.P.assign(degrees, 0.0);
    target.Q.assign(degrees, 0.0);
    for (const auto& t : terms) {
      auto& dst = t.kind == Oscillation::Sin ? target.Q : target.P;
      dst[static_cast<std::size_t>(t.power)] += t.amplitude;
    }

    std::vector<std::vector<double>> A;
    std::vector<double> rhs;
    for (std::size_t m = 0; m < degrees; ++m) {
      std::vector<double> row(unknowns);
      for (std::size_t u = 0; u < unknowns; ++u) row[u] = coeff(images[u].P, m);
      A.push_back(row);
      rhs.push_back(target.P[m]);
      if (osc) {
        for (std::size_t u = 0; u < unknowns; ++u) row[u] = coeff(images[u].Q, m);
        A.push_back(row);
        rhs.push_back(target.Q[m]);
      }
    }
    const std::vector<double> c = least_squares(A, rhs);
    std::size_t u = 0;
    for (int j = 0; j <= k; ++j) {
      parts.push_back(term_expr(c[u++], s + j, a, b, osc ? Oscillation::Cos : Oscillation::None, var));
      if (osc) parts.push_back(term_expr(c[u++], s + j, a, b, Oscillation::Sin, var));
    }
  }
  Expr yp = sum_of(parts);

  // back-substitution
  const std::string v(var);
  for (int i = 0; i < 16; ++i) {
    const double t = -2.0 + 4.0 * (i + 0.5) / 16.0;
    const Dual2 y = differentiate(yp, v, Env{{v, t}});
    const double H = forcing(t);
    const double res = y.d2 + alpha * y.d1 + beta * y.value - H;
    const double scale = 1.0 + std::abs(y.d2) + std::abs(alpha * y.d1) + std::abs(beta * y.value) +
                         std::abs(H);
    if (!(std::abs(res) <= 1e-10 * scale))
      fail(ErrorCode::InternalVerificationFailed, "solve_particular_cc",
           "particular solution residual " + num(res) + " at t=" + num(t), {t});
  }
  return yp;
}

Expr GeneralSolution::combine(double c1, double c2) const {
  std::vector<Expr> parts;
  auto scaled = [](double c, const Expr& e) -> Expr {
    if (c == 0.0) return Expr(0.0);
    if (c == 1.0) return e;
    return Expr(c) * e;
  };
  parts.push_back(scaled(c1, basis.y1));
  parts.push_back(scaled(c2, basis.y2));
  parts.push_back(particular);
  return sum_of(parts);
}

GeneralSolution solve_general_cc(double alpha, double beta, const ForcingSpec& forcing,
                                 std::string_view var) {
  GeneralSolution g;
  g.alpha = alpha;
  g.beta = beta;
  g.forcing = forcing;
  g.var = std::string(var);
  g.basis = solve_homogeneous_cc(alpha, beta, var);
  g.particular = forcing.empty() ? Expr(0.0) : solve_particular_cc(alpha, beta, forcing, var);
  return g;
}

FittedSolution apply_initial_conditions(const GeneralSolution& general, double t0, double y0,
                                        double v0) {
  const Env env{{general.var, t0}};
  const Dual2 u1 = differentiate(general.basis.y1, general.var, env);
  const Dual2 u2 = differentiate(general.basis.y2, general.var, env);
  const Dual2 p = differentiate(general.particular, general.var, env);
  double m[2][3] = {{u1.value, u2.value, y0 - p.value}, {u1.d1, u2.d1, v0 - p.d1}};
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double scale = (std::abs(m[0][0]) + std::abs(m[0][1])) * (std::abs(m[1][0]) + std::abs(m[1][1]));
  if (!(std::abs(det) > 1e-14 * scale) || scale == 0.0)
    fail(ErrorCode::SingularWronskian, "apply_initial_conditions",
         "basis Wronskian vanishes at t=" + num(t0), {t0});
  if (std::abs(m[1][0]) > std::abs(m[0][0]))
    for (int j = 0; j < 3; ++j) std::swap(m[0][j], m[1][j]);
  const double f = m[1][0] / m[0][0];
  for (int j = 0; j < 3; ++j) m[1][j] -= f * m[0][j];
  const double c2 = m[1][2] / m[1][1];
  const double c1 = (m[0][2] - m[0][1] * c2) / m[0][0];

  FittedSolution out{general.combine(c1, c2), c1, c2};
  const Dual2 chk = differentiate(out.y, general.var, env);
  if (std::abs(chk.value - y0) > 1e-10 * (1 + std::abs(y0)) ||
      std::abs(chk.d1 - v0) > 1e-10 * (1 + std::abs(v0)))
    fail(ErrorCode::InternalVerificationFailed, "apply_initial_conditions",
         "fitted solution misses the initial conditions at t=" + num(t0), {t0});
  return out;
}

double cc_residual(const GeneralSolution& eq, const Expr& Y, double lo, double hi, std::size_t n) {
  double worst = 0.0, ymax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    const Dual2 y = differentiate(Y, eq.var, Env{{eq.var, t}});
    const double r = y.d2 + eq.alpha * y.d1 + eq.beta * y.value - eq.forcing(t);
    worst = std::max(worst, std::abs(r));
    ymax = std::max(ymax, std::abs(y.value));
  }
  return worst / (1.0 + ymax);
}

// ---------------------------------------------------------------- ClosedForm

ClosedForm ClosedForm::from_expr(Expr body, std::string var, Interval valid) {
  ClosedForm c;
  c.body_ = std::move(body);
  c.var_ = std::move(var);
  c.valid = valid;
  return c;
}

ClosedForm ClosedForm::from_trajectory(std::shared_ptr<const Trajectory> traj, std::string var) {
  ClosedForm c;
  c.valid = {traj->x_min(), traj->x_max()};
  c.body_ = std::move(traj);
  c.var_ = std::move(var);
  return c;
}

std::optional<Expr> ClosedForm::body_expr() const {
  if (const auto* e = std::get_if<Expr>(&body_)) return *e;
  return std::nullopt;
}

Dual2 ClosedForm::body_jet(double s) const {
  if (const auto* e = std::get_if<Expr>(&body_)) return differentiate(*e, var_, Env{{var_, s}});
  return std::get<std::shared_ptr<const Trajectory>>(body_)->at(s);
}

Dual2 ClosedForm::jet(double x) const {
  if (!(x >= valid.lo && x <= valid.hi))
    fail(ErrorCode::OutOfDomain, "evaluate",
         "x=" + num(x) + " outside [" + num(valid.lo) + ", " + num(valid.hi) + "]", {x});
  Dual2 y;
  if (tmap_) {
    const Dual2 t = tmap_->jet(x);
    const Dual2 Y = body_jet(t.value);
    y = secord::chain(t, Y.value, Y.d1, Y.d2);
  } else {
    y = body_jet(x);
  }
  if (outer_) {
    const Dual2 g = outer_->derivs(y.value);
    y = secord::chain(y, g.value, g.d1, g.d2);
  }
  return y;
}

std::vector<std::string> ClosedForm::chain() const {
  std::vector<std::string> out;
  const std::string bv = var_ == "t" ? "Y(t)" : "y(" + var_ + ")";
  if (const auto* e = std::get_if<Expr>(&body_)) {
    out.push_back(bv + " = " + e->to_string());
  } else {
    const auto& tr = std::get<std::shared_ptr<const Trajectory>>(body_);
    out.push_back(bv + " = numeric trajectory (" + tr->method() + ", tol " + num(tr->tolerance()) +
                  ", " + std::to_string(tr->samples().size()) + " samples)");
  }
  if (tmap_) {
    const std::string w = tmap_->weight_expr().to_string();
    out.push_back("t(x) = integral from " + num(tmap_->x0()) + " to x of 1/(" + w + ")");
  }
  if (outer_) out.push_back(outer_->description);
  return out;
}

std::string ClosedForm::describe() const {
  std::string s;
  for (const auto& c : chain()) {
    if (!s.empty()) s += "; ";
    s += c;
  }
  return s;
}

ClosedForm compose_solution(const ClosedForm& Y, std::shared_ptr<const TransformMap> tmap) {
  if (Y.var() != "t" || Y.tmap())
    fail(ErrorCode::InvalidInput, "compose_solution", "body must be a function of t");
  const Interval tr = tmap->t_range();
  const double tlo = std::max(tr.lo, Y.valid.lo);
  const double thi = std::min(tr.hi, Y.valid.hi);
  if (!(tlo <= thi))
    fail(ErrorCode::OutOfDomain, "compose_solution", "solution domain misses the image of t(x)");
  ClosedForm out = Y;
  out.set_tmap(tmap);
  out.valid = {tmap->invert(tlo), tmap->invert(thi)};
  out.singular_lo = (tlo == tr.lo && tmap->singular_lo()) || (tlo > tr.lo && Y.singular_lo);
  out.singular_hi = (thi == tr.hi && tmap->singular_hi()) || (thi < tr.hi && Y.singular_hi);
  return out;
}

SolveOutcome solve_reduced(const ReducedOde& reduced, const SolveOptions& opt) {
  SolveOutcome out;
  if (!reduced.tmap) fail(ErrorCode::InvalidInput, "solve", "reduced equation lacks a transform");
  const Interval tr = reduced.tmap->t_range();

  if (reduced.form == ReducedOde::Form::LinearCC) {
    GeneralSolution g = solve_general_cc(reduced.alpha, reduced.beta, reduced.forcing, "t");
    std::vector<Expr> ys;
    if (reduced.ics) {
      ys.push_back(apply_initial_conditions(g, reduced.ics->t, reduced.ics->y, reduced.ics->v).y);
    } else if (opt.coefficients) {
      ys.push_back(g.combine((*opt.coefficients)[0], (*opt.coefficients)[1]));
    } else {
      ys.push_back(g.combine(1.0, 0.0));
      ys.push_back(g.combine(0.0, 1.0));
      out.notes.push_back("no initial conditions: returning both basis members plus the particular part");
    }
    for (const auto& Y : ys) {
      if (std::isfinite(tr.lo) && std::isfinite(tr.hi)) {
        const double r = cc_residual(g, Y, tr.lo, tr.hi);
        if (!(r <= 1e-9))
          fail(ErrorCode::InternalVerificationFailed, "solve",
               "closed form fails its reduced equation (scaled residual " + num(r) + ")");
      }
      out.solutions.push_back(
          compose_solution(ClosedForm::from_expr(Y, "t", {-kInf, kInf}), reduced.tmap));
    }
    out.general = std::move(g);
    return out;
  }

  if (!reduced.ics)
    fail(ErrorCode::InvalidInput, "solve",
         "autonomous reduced equation needs initial conditions for numeric integration");
  const Expr f = reduced.f;
  SecondOrderRhs rhs = [f](double, double y, double v) {
    return -evaluate(f, Env{{"y", y}, {"v", v}});
  };
  IntegratorOptions io;
  io.rtol = opt.rtol;
  io.atol = opt.rtol;
  io.blowup = opt.blowup;
  const auto& ic = *reduced.ics;
  auto traj = std::make_shared<const Trajectory>(
      integrate_two_sided(rhs, ic.t, ic.y, ic.v, tr.lo, tr.hi, io, true));
  ClosedForm Y = ClosedForm::from_trajectory(traj, "t");
  if (traj->x_min() > tr.lo) {
    Y.singular_lo = true;
    out.notes.push_back("integration stopped (" + std::string(to_string(traj->reason())) +
                        ") at t=" + num(traj->x_min()));
  }
  if (traj->x_max() < tr.hi) {
    Y.singular_hi = true;
    out.notes.push_back("integration stopped (" + std::string(to_string(traj->reason())) +
                        ") at t=" + num(traj->x_max()));
  }
  ClosedForm y = compose_solution(Y, reduced.tmap);
  if (Y.singular_lo) y.notes.push_back("solution singular near x=" + num(y.valid.lo));
  if (Y.singular_hi) y.notes.push_back("solution singular near x=" + num(y.valid.hi));
  out.solutions.push_back(std::move(y));
  return out;
}

}  // namespace secord
