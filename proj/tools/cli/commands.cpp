#include "commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <random>

#include "secord/closed_form.hpp"
#include "secord/equation.hpp"
#include "secord/verify.hpp"

namespace secord::cli {

namespace {

double effective_tol(const ProblemFile& pf, const RunOptions& opt) {
  return opt.tol_given ? opt.tol : pf.tol.value_or(opt.tol);
}

Json j_interval(Interval i) { return Json::array({i.lo, i.hi}); }

Json j_point(const std::vector<double>& p) { return Json(p); }

Json j_residual(const VerificationReport& r) {
  Json j;
  j["requested"] = j_interval(r.requested);
  j["checked"] = j_interval(r.checked);
  j["grid"] = r.grid;
  j["evaluated"] = r.evaluated;
  j["failed_points"] = r.failed_points;
  j["max_abs"] = r.max_abs;
  j["max_scaled"] = r.max_scaled;
  j["l2_scaled"] = r.l2_scaled;
  j["argmax"] = r.argmax;
  j["tol"] = r.tol;
  if (r.ic_error) {
    j["ic_error"] = Json::array({(*r.ic_error)[0], (*r.ic_error)[1]});
    j["ic_tol"] = r.ic_tol;
  }
  j["pass"] = r.pass;
  j["notes"] = r.notes;
  return j;
}

Json j_closed(const ClosedForm& y) {
  Json j;
  j["chain"] = y.chain();
  j["numeric"] = y.is_numeric();
  j["valid"] = j_interval(y.valid);
  j["singular_lo"] = y.singular_lo;
  j["singular_hi"] = y.singular_hi;
  j["notes"] = y.notes;
  return j;
}

Json j_exactness(const ExactnessReport& r) {
  Json j;
  j["exact"] = r.exact;
  j["max_raw"] = r.max_raw;
  j["max_scaled"] = r.max_scaled;
  j["tol"] = r.tol;
  j["evaluated"] = r.evaluated;
  j["skipped"] = r.skipped;
  j["box"] = {{"x", j_interval(r.box.x)}, {"z", j_interval(r.box.z)}, {"zp", j_interval(r.box.zp)}};
  if (r.witness) {
    j["witness"] = {{"x", r.witness->x}, {"z", r.witness->z}, {"zp", r.witness->zp}};
    j["witness_residuals"] = r.witness_residuals;
  }
  return j;
}

SecondOrderEquation equation_of(const ProblemFile& pf) {
  if (pf.equation) return SecondOrderEquation::from_expr(*pf.equation);
  switch (pf.cls) {
    case ProblemClass::Chebyshev:
    case ProblemClass::LinearWeighted:
      return SecondOrderEquation::from_expr(pf.ode_problem().equation());
    case ProblemClass::FType:
      return pf.ftype_problem().y_equation();
    case ProblemClass::QuasiLinear:
    case ProblemClass::LinearIFactor:
      return SecondOrderEquation::from_expr(pf.quasilinear().equation());
    case ProblemClass::Functional:
      break;
  }
  throw Error(ErrorCode::InvalidInput, "cli", "verify", "functional problems have no equation to verify");
}

bool endpoint_ok(const Expr& e, double x) {
  try {
    const Dual2 j = differentiate(e, "x", Env{{"x", x}});
    return std::isfinite(j.value) && std::isfinite(j.d1) && std::isfinite(j.d2);
  } catch (const Error&) {
    return false;
  }
}

ClosedForm closed_from_expr(const Expr& e, Interval valid) {
  ClosedForm y = ClosedForm::from_expr(e, "x", valid);
  y.singular_lo = !endpoint_ok(e, valid.lo);
  y.singular_hi = !endpoint_ok(e, valid.hi);
  return y;
}

ResidualOptions residual_options(const ProblemFile& pf, const RunOptions& opt) {
  ResidualOptions r;
  r.grid = opt.grid;
  r.tol = pf.verify.tol.value_or(1e-6);
  if (pf.verify.ic_tol) r.ic_tol = *pf.verify.ic_tol;
  return r;
}

std::vector<double> linspace(Interval i, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k)
    g[k] = n == 1 ? i.lo : i.lo + (i.hi - i.lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return g;
}

double sup_error(const ClosedForm& y, const Expr& exact, Interval i) {
  double m = 0.0;
  for (double x : linspace(i, 2001)) m = std::max(m, std::abs(y(x) - evaluate(exact, Env{{"x", x}})));
  return m;
}

std::vector<std::array<double, 3>> sample(const ClosedForm& y, Interval i, std::size_t n) {
  std::vector<std::array<double, 3>> rows;
  for (double x : linspace(i, n)) {
    try {
      const Dual2 j = y.jet(x);
      rows.push_back({x, j.value, j.d1});
    } catch (const Error&) {
    }
  }
  return rows;
}

/// Residual, oracle and independent-integration checks for one solution.
Json check_solution(const ClosedForm& y, const SecondOrderEquation& eq, const ProblemFile& pf,
                    const RunOptions& opt, const ResidualOptions& ro, bool& pass,
                    Interval& checked) {
  Json j;
  j["closed_form"] = j_closed(y);
  const Interval want = pf.verify.interval.value_or(pf.domain);
  const VerificationReport r = residual_check(y, eq, want, ro, pf.ics);
  checked = r.checked;
  j["residual"] = j_residual(r);
  pass = pass && r.pass;
  if (pf.verify.exact) {
    const double s = sup_error(y, *pf.verify.exact, r.checked);
    const bool ok = s <= pf.verify.sup_tol;
    j["sup_error"] = {{"oracle", pf.verify.exact->to_string()}, {"interval", j_interval(r.checked)},
                      {"value", s}, {"tol", pf.verify.sup_tol}, {"pass", ok}};
    pass = pass && ok;
  }
  if (pf.verify.rk_interval && pf.ics) {
    const Interval ri = *pf.verify.rk_interval;
    const Trajectory tr = integrate_equation(eq, *pf.ics, ri.lo, ri.hi, std::min(effective_tol(pf, opt), 1e-10));
    double gap = 0.0;
    for (double x : linspace(ri, 501)) gap = std::max(gap, std::abs(tr.at(x).value - y(x)));
    const bool ok = gap <= pf.verify.rk_tol;
    j["rk_agreement"] = {{"interval", j_interval(ri)}, {"max_gap", gap}, {"tol", pf.verify.rk_tol},
                         {"pass", ok}};
    pass = pass && ok;
  }
  return j;
}

/// Printed statements are residual-tested and reported without affecting the verdict.
Json check_printed(const ProblemFile& pf, const SecondOrderEquation& eq, const ResidualOptions& ro) {
  Json list = Json::array();
  const Interval want = pf.verify.interval.value_or(pf.domain);
  if (pf.printed.solution) {
    const ClosedForm y = closed_from_expr(*pf.printed.solution, pf.domain);
    Json j;
    j["statement"] = "solution";
    j["expression"] = pf.printed.solution->to_string();
    try {
      const VerificationReport r = residual_check(y, eq, want, ro);
      j["residual"] = j_residual(r);
      j["holds"] = r.pass;
    } catch (const Error& e) {
      j["error"] = error_object(e)["error"];
      j["holds"] = false;
    }
    list.push_back(j);
  }
  if (pf.printed.equation && pf.verify.exact) {
    const ClosedForm y = closed_from_expr(*pf.verify.exact, pf.domain);
    Json j;
    j["statement"] = "equation";
    j["expression"] = pf.printed.equation->to_string();
    try {
      const VerificationReport r =
          residual_check(y, SecondOrderEquation::from_expr(*pf.printed.equation), want, ro);
      j["residual"] = j_residual(r);
      j["holds"] = r.pass;
    } catch (const Error& e) {
      j["error"] = error_object(e)["error"];
      j["holds"] = false;
    }
    list.push_back(j);
  }
  if (!pf.printed.note.empty() && !list.empty()) list.back()["note"] = pf.printed.note;
  return list;
}

Json j_reduction(const ReducedOde& r) {
  Json j;
  j["form"] = r.form == ReducedOde::Form::Autonomous ? "autonomous" : "linear_constant_coefficient";
  j["text"] = r.text();
  if (r.form == ReducedOde::Form::LinearCC) {
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
  }
  const TransformMap& m = *r.tmap;
  j["transform"] = {{"weight", m.weight_expr().to_string()},
                    {"mode", m.mode() == WeightMode::SqrtP ? "1/sqrt(p)" : "1/P"},
                    {"x0", m.x0()},
                    {"t_range", j_interval(m.t_range())},
                    {"singular_lo", m.singular_lo()},
                    {"singular_hi", m.singular_hi()},
                    {"interpolation_error", m.interpolation_error()}};
  if (r.ics) j["ics"] = {{"t", r.ics->t}, {"y", r.ics->y}, {"v", r.ics->v}};
  return j;
}

Json header(const ProblemFile& pf, const char* command) {
  Json j;
  j["name"] = pf.name;
  j["command"] = command;
  j["class"] = to_string(pf.cls);
  if (!pf.description.empty()) j["description"] = pf.description;
  return j;
}

CommandResult solve_chebyshev(const ProblemFile& pf, const RunOptions& opt) {
  CommandResult res;
  res.report = header(pf, "solve");
  const double tol = effective_tol(pf, opt);
  const OdeProblem pr = pf.ode_problem();
  const SecondOrderEquation eq = equation_of(pf);
  res.report["equation"] = eq.text();
  const ReducedOde r = reduce_problem(pr, std::min(tol, 1e-10));
  res.report["reduction"] = j_reduction(r);
  SolveOptions so;
  so.rtol = tol;
  so.coefficients = pf.coefficients;
  const SolveOutcome out = solve_reduced(r, so);
  res.report["solve_notes"] = out.notes;
  const ResidualOptions ro = residual_options(pf, opt);
  Json sols = Json::array();
  for (std::size_t k = 0; k < out.solutions.size(); ++k) {
    Interval checked;
    sols.push_back(check_solution(out.solutions[k], eq, pf, opt, ro, res.pass, checked));
    if (k == 0) res.traj = sample(out.solutions[k], checked, opt.grid);
  }
  res.report["solutions"] = sols;
  res.report["printed"] = check_printed(pf, eq, ro);
  return res;
}

CommandResult solve_ftype(const ProblemFile& pf, const RunOptions& opt) {
  CommandResult res;
  res.report = header(pf, "solve");
  const FTypeProblem fp = pf.ftype_problem();
  const SecondOrderEquation eq = fp.y_equation();
  res.report["equation"] = eq.text();
  const FTypeSolution sol = solve_f_type(fp, std::min(effective_tol(pf, opt), 1e-10));
  res.report["substitution"] = {{"f", sol.linear.fspec.text()}, {"linear", sol.linear.text}};
  if (sol.linear.ics)
    res.report["substitution"]["z_ics"] = {{"x", sol.linear.ics->x}, {"z", sol.linear.ics->y},
                                           {"zp", sol.linear.ics->yp}};
  Json rv = Json::array();
  for (const Interval& i : sol.range_violations) rv.push_back(j_interval(i));
  res.report["range_violations"] = rv;
  res.report["solve_notes"] = sol.notes;
  ResidualOptions ro = residual_options(pf, opt);
  Json sols = Json::array();
  for (std::size_t k = 0; k < sol.y.size(); ++k) {
    const ClosedForm& y = sol.y[k];
    if (pf.verify.min_f) {
      const FSpec f = sol.linear.fspec;
      const double lim = *pf.verify.min_f;
      ro.include = [&y, f, lim](double x) { return f(y(x)) >= lim; };
    }
    Interval checked;
    Json j = check_solution(y, eq, pf, opt, ro, res.pass, checked);
    if (pf.verify.min_f) j["residual"]["include"] = "f(y) >= " + std::to_string(*pf.verify.min_f);
    sols.push_back(j);
    if (k == 0) res.traj = sample(y, checked, opt.grid);
  }
  res.report["solutions"] = sols;
  res.report["printed"] = check_printed(pf, eq, residual_options(pf, opt));
  return res;
}

struct Classification {
  ExactnessReport raw;
  std::optional<ExactnessReport> after;
  std::optional<QuasiLinearOde> exact_form;
  std::string verdict;
};

Expr default_mu(const ProblemFile& pf) {
  if (pf.mu) return *pf.mu;
  if (pf.cls == ProblemClass::LinearIFactor) return Expr(1.0) / pf.a2;
  return Expr(1.0);
}

Classification classify(const ProblemFile& pf) {
  Classification c;
  const QuasiLinearOde ode = pf.quasilinear();
  const Box box = pf.box ? *pf.box : default_box(ode);
  c.raw = check_exactness(ode, box);
  if (c.raw.exact) {
    c.exact_form = ode;
    c.verdict = "exact";
  } else {
    c.verdict = "not_exact";
  }
  if (pf.mu || pf.cls == ProblemClass::LinearIFactor) {
    const QuasiLinearOde m = apply_mu(default_mu(pf), ode, box);
    c.after = check_exactness(m, box);
    if (!c.raw.exact && c.after->exact) {
      c.verdict = "exact_after_mu";
      c.exact_form = m;
    }
  }
  return c;
}

bool classification_pass(const ProblemFile& pf, const Classification& c) {
  if (!pf.verify.expect) return c.exact_form.has_value();
  const std::string& e = *pf.verify.expect;
  if (e == "exact") return c.raw.exact;
  if (e == "not_exact") return !c.raw.exact;
  return !c.raw.exact && c.after && c.after->exact;
}

void add_classification(const ProblemFile& pf, const Classification& c, CommandResult& res) {
  Json j;
  j["equation"] = pf.quasilinear().equation().to_string();
  j["raw"] = j_exactness(c.raw);
  if (c.after) {
    j["mu"] = default_mu(pf).to_string();
    j["after_mu"] = j_exactness(*c.after);
  }
  j["verdict"] = c.verdict;
  if (pf.verify.expect) j["expected"] = *pf.verify.expect;
  bool ok = classification_pass(pf, c);
  if (pf.cls == ProblemClass::LinearIFactor) {
    const LinearCriterionReport w = linear_ifactor_check(pf.a2, pf.a1, pf.a0, pf.domain);
    j["linear_criterion"] = {{"statement", "a2*a1' - a1*a2' = a0*a2"},
                             {"holds", w.holds},
                             {"max_raw", w.max_raw},
                             {"max_scaled", w.max_scaled},
                             {"samples", w.samples}};
    ok = ok && w.holds;
  }
  j["pass"] = ok;
  res.report["exactness"] = j;
  res.pass = res.pass && ok;
}

double invariant_value(const Expr& e, double x, double z, double zp) {
  return evaluate(e, Env{{"x", x}, {"z", z}, {"zp", zp}});
}

DriftReport expr_drift(const Expr& e, const Trajectory& tr) {
  const Sample& s0 = tr.samples().front();
  const double c = invariant_value(e, s0.x, s0.y, s0.yp);
  return conservation_check(
      [&e](double x, double z, double zp) { return invariant_value(e, x, z, zp); }, c, tr);
}

Json j_drift(const DriftReport& d, double tol) {
  return {{"max_drift", d.max_drift}, {"at_x", d.at_x}, {"samples", d.samples}, {"tol", tol},
          {"pass", d.max_drift <= tol}};
}

void add_integration(const ProblemFile& pf, const RunOptions& opt, const Classification& c,
                     CommandResult& res) {
  Json j;
  const QuasiLinearOde ode = pf.quasilinear();
  if (!ode.ics)
    throw Error(ErrorCode::InvalidInput, "cli", "exact integrate", "initial conditions are required");
  if (!c.exact_form) {
    j["note"] = "no exact form available; first integral not built";
    j["pass"] = false;
    res.report["integration"] = j;
    res.pass = false;
    return;
  }
  const double tol = effective_tol(pf, opt);
  const Point3 p0 = *ode.ics;
  const double x1 = pf.integrate_to.value_or(pf.domain.hi);
  const FirstIntegral fi = FirstIntegral::build(*c.exact_form, p0, std::min(tol, 1e-10));
  IntegratorOptions io;
  io.rtol = io.atol = tol;
  const Trajectory tr = integrate_ivp(ode.rhs(), p0.x, p0.z, p0.zp, x1, io);
  j["interval"] = Json::array({std::min(p0.x, x1), std::max(p0.x, x1)});
  j["anchor"] = {{"x", p0.x}, {"z", p0.z}, {"zp", p0.zp}};
  j["steps"] = tr.steps();
  bool ok = true;

  const DriftReport d = conservation_check(fi, tr);
  j["first_integral_drift"] = j_drift(d, pf.verify.drift_tol);
  ok = ok && d.max_drift <= pf.verify.drift_tol;

  const Trajectory fo = integrate_first_order(fi, p0.x, p0.z, p0.zp, x1, std::min(tol, 1e-10));
  double gap = 0.0;
  const Interval span{std::min(p0.x, x1), std::max(p0.x, x1)};
  for (double x : linspace(span, 101))
    gap = std::max(gap, std::abs(fo.at(x).value - tr.at(x).value));
  j["first_order_agreement"] = {{"max_gap", gap}, {"tol", pf.verify.rk_tol}, {"pass", gap <= pf.verify.rk_tol}};
  ok = ok && gap <= pf.verify.rk_tol;

  if (pf.verify.invariant) {
    const Expr& inv = *pf.verify.invariant;
    Json ij;
    ij["expression"] = inv.to_string();
    const DriftReport di = expr_drift(inv, tr);
    ij["drift"] = j_drift(di, pf.verify.drift_tol);
    ok = ok && di.max_drift <= pf.verify.drift_tol;
    const Box box = pf.box ? *pf.box : default_box(ode);
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> ux(box.x.lo, box.x.hi), uz(box.z.lo, box.z.hi),
        up(box.zp.lo, box.zp.hi);
    const double i0 = invariant_value(inv, p0.x, p0.z, p0.zp);
    double worst = 0.0;
    std::size_t used = 0;
    for (int k = 0; k < 50; ++k) {
      const double x = ux(rng), z = uz(rng), zp = up(rng);
      try {
        worst = std::max(worst, std::abs(fi(x, z, zp) - (invariant_value(inv, x, z, zp) - i0)));
        ++used;
      } catch (const Error&) {
      }
    }
    ij["quadrature_agreement"] = {{"points", used}, {"max_error", worst}, {"tol", 1e-8},
                                  {"pass", worst <= 1e-8}};
    ok = ok && worst <= 1e-8;
    j["closed_form_invariant"] = ij;
  }
  if (pf.printed.first_integral) {
    Json pj;
    pj["expression"] = pf.printed.first_integral->to_string();
    const DriftReport dp = expr_drift(*pf.printed.first_integral, tr);
    pj["drift"] = j_drift(dp, pf.verify.drift_tol);
    pj["holds"] = dp.max_drift <= pf.verify.drift_tol;
    if (!pf.printed.note.empty()) pj["note"] = pf.printed.note;
    res.report["printed"] = Json::array({pj});
  }
  if (pf.has_fspec && pf.equation) {
    auto body = std::make_shared<const Trajectory>(tr);
    ClosedForm y = ClosedForm::from_trajectory(body, "x");
    const FSpec f = pf.fspec;
    y.set_outer({"y = f^-1(z), f(y) = " + f.text(), [f](double z) { return invert_f_derivs(f, z); }});
    ResidualOptions ro = residual_options(pf, opt);
    const VerificationReport r = residual_check(
        y, SecondOrderEquation::from_expr(*pf.equation), y.valid, ro,
        InitialConditions{p0.x, invert_f(f, p0.z), invert_f_derivs(f, p0.z).d1 * p0.zp});
    j["y_equation"] = {{"equation", pf.equation->to_string()}, {"residual", j_residual(r)}};
    ok = ok && r.pass;
  }
  j["pass"] = ok;
  res.report["integration"] = j;
  res.pass = res.pass && ok;
  for (double x : linspace({std::min(p0.x, x1), std::max(p0.x, x1)}, opt.grid)) {
    const Dual2 v = tr.at(x);
    res.traj.push_back({x, v.value, v.d1});
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void append_number(std::string& s, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, ptr);
}

}  // namespace

Json error_object(const Error& e) {
  Json j;
  j["code"] = to_string(e.code());
  j["module"] = e.module();
  j["operation"] = e.operation();
  j["message"] = e.what();
  j["point"] = j_point(e.point());
  return Json{{"error", j}};
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InternalVerificationFailed:
    case ErrorCode::PreconditionFailed:
      return 2;
    default:
      return 1;
  }
}

CommandResult cmd_reduce(const ProblemFile& pf, const RunOptions& opt) {
  CommandResult res;
  res.report = header(pf, "reduce");
  const SecondOrderEquation eq = equation_of(pf);
  res.report["equation"] = eq.text();
  if (pf.cls == ProblemClass::Chebyshev || pf.cls == ProblemClass::LinearWeighted) {
    const ReducedOde r = reduce_problem(pf.ode_problem(), std::min(effective_tol(pf, opt), 1e-10));
    res.report["reduction"] = j_reduction(r);
  } else if (pf.cls == ProblemClass::FType) {
    const LinearZProblem z = apply_substitution(pf.ftype_problem());
    res.report["substitution"] = {{"f", z.fspec.text()}, {"linear", z.text}};
    if (const auto* op = std::get_if<OdeProblem>(&z.form)) {
      const ReducedOde r = reduce_problem(*op, std::min(effective_tol(pf, opt), 1e-10));
      res.report["reduction"] = j_reduction(r);
    }
  } else {
    throw Error(ErrorCode::InvalidInput, "cli", "reduce",
                "reduce applies to chebyshev, linear_weighted and ftype problems; use 'exact' for " +
                    std::string(to_string(pf.cls)));
  }
  return res;
}

CommandResult cmd_solve(const ProblemFile& pf, const RunOptions& opt) {
  switch (pf.cls) {
    case ProblemClass::Chebyshev:
    case ProblemClass::LinearWeighted:
      return solve_chebyshev(pf, opt);
    case ProblemClass::FType:
      return solve_ftype(pf, opt);
    case ProblemClass::QuasiLinear:
    case ProblemClass::LinearIFactor: {
      CommandResult res;
      res.report = header(pf, "solve");
      const Classification c = classify(pf);
      add_classification(pf, c, res);
      if (pf.quasilinear().ics) add_integration(pf, opt, c, res);
      return res;
    }
    case ProblemClass::Functional:
      return cmd_functional(pf, opt, std::nullopt, std::nullopt);
  }
  return {};
}

CommandResult cmd_exact_check(const ProblemFile& pf, const RunOptions&) {
  CommandResult res;
  res.report = header(pf, "exact check");
  add_classification(pf, classify(pf), res);
  return res;
}

CommandResult cmd_exact_integrate(const ProblemFile& pf, const RunOptions& opt) {
  CommandResult res;
  res.report = header(pf, "exact integrate");
  const Classification c = classify(pf);
  add_classification(pf, c, res);
  res.pass = true;  // the verdict gates integration only through exact_form
  add_integration(pf, opt, c, res);
  return res;
}

CommandResult cmd_verify(const ProblemFile& pf, const RunOptions& opt, const Expr& solution) {
  CommandResult res;
  res.report = header(pf, "verify");
  const SecondOrderEquation eq = equation_of(pf);
  res.report["equation"] = eq.text();
  res.report["solution"] = solution.to_string();
  const Interval want = pf.verify.interval.value_or(pf.domain);
  const ClosedForm y = closed_from_expr(solution, pf.domain);
  const VerificationReport r = residual_check(y, eq, want, residual_options(pf, opt), pf.ics);
  res.report["residual"] = j_residual(r);
  res.pass = r.pass;
  res.traj = sample(y, r.checked, opt.grid);
  return res;
}

CommandResult cmd_functional(const ProblemFile& pf, const RunOptions& opt,
                             const std::optional<Expr>& y, const std::optional<Expr>& eta) {
  if (pf.cls != ProblemClass::Functional)
    throw Error(ErrorCode::InvalidInput, "cli", "functional", "not a functional problem");
  CommandResult res;
  res.report = header(pf, "functional");
  const Interval I = pf.domain;
  const Expr ys = y.value_or(pf.ystar);
  const ClosedForm ystar = closed_from_expr(ys, I);
  const double tol = pf.verify.tol.value_or(1e-6);
  res.report["p"] = pf.p.to_string();
  res.report["h"] = pf.h.to_string();
  res.report["ystar"] = ys.to_string();
  res.report["Q"] = functional_value(pf.p, pf.h, ystar, I);
  res.report["euler_lagrange_residual"] = euler_lagrange_residual(pf.p, pf.h, ystar, I);
  const std::vector<Expr> etas = eta ? std::vector<Expr>{*eta} : pf.etas;
  Json list = Json::array();
  for (const Expr& e : etas) {
    Json j;
    j["eta"] = e.to_string();
    const ClosedForm ec = closed_from_expr(e, I);
    StationarityOptions so;
    try {
      const StationarityReport r = stationarity_check(pf.p, pf.h, ystar, ec, I, so);
      j["derivative"] = r.derivative;
      j["central"] = r.central;
      j["eta_boundary"] = r.eta_boundary;
      j["tol"] = tol;
      j["pass"] = std::abs(r.derivative) <= tol;
      res.pass = res.pass && std::abs(r.derivative) <= tol;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::PreconditionFailed) throw;
      j["error"] = error_object(err)["error"];
      so.force = true;
      const StationarityReport r = stationarity_check(pf.p, pf.h, ystar, ec, I, so);
      j["forced_derivative"] = r.derivative;
      j["pass"] = false;
      res.pass = false;
    }
    list.push_back(j);
  }
  res.report["perturbations"] = list;
  (void)opt;
  return res;
}

void write_artifacts(const std::string& name, CommandResult& result, const std::string& command,
                     const RunOptions& opt) {
  std::filesystem::create_directories(opt.out);
  result.report["pass"] = result.pass;
  if (opt.timestamp) result.report["timestamp"] = utc_now();
  (void)command;
  {
    std::ofstream f(opt.out / (name + ".report.json"));
    f << result.report.dump(2) << '\n';
  }
  if (!result.traj.empty()) {
    std::string s = "x,y,yp\n";
    for (const auto& row : result.traj) {
      append_number(s, row[0]);
      s += ',';
      append_number(s, row[1]);
      s += ',';
      append_number(s, row[2]);
      s += '\n';
    }
    std::ofstream f(opt.out / (name + ".traj.csv"));
    f << s;
  }
}

}  // namespace secord::cli
