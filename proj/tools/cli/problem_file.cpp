#include "problem_file.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "secord/error.hpp"

namespace secord::cli {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidInput, "cli", "load_problem", where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) schema_error(where, "unknown key '" + key + "'");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "expected a string");
  return j.get<std::string>();
}

Expr expr(const json& j, const std::string& where, std::initializer_list<std::string> vars) {
  if (j.is_number()) return Expr(j.get<double>());
  const std::string s = text(j, where);
  try {
    return parse(s, vars);
  } catch (const Error& e) {
    rethrow_in(e, "cli", "load_problem", where);
  }
}

Interval interval(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) schema_error(where, "expected [lo, hi]");
  const Interval i{number(j[0], where), number(j[1], where)};
  if (!(i.lo < i.hi)) schema_error(where, "need lo < hi");
  return i;
}

Oscillation oscillation(const std::string& s, const std::string& where) {
  if (s == "none") return Oscillation::None;
  if (s == "sin") return Oscillation::Sin;
  if (s == "cos") return Oscillation::Cos;
  schema_error(where, "kind must be none, sin or cos");
}

ForcingSpec forcing(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array of terms");
  ForcingSpec f;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    only_keys(j[i], w, {"amp", "power", "rate", "freq", "kind"});
    ForcingTerm t;
    t.amplitude = j[i].contains("amp") ? number(j[i]["amp"], w + ".amp") : 1.0;
    t.power = j[i].contains("power") ? static_cast<int>(number(j[i]["power"], w + ".power")) : 0;
    t.rate = j[i].contains("rate") ? number(j[i]["rate"], w + ".rate") : 0.0;
    t.frequency = j[i].contains("freq") ? number(j[i]["freq"], w + ".freq") : 0.0;
    t.kind = j[i].contains("kind") ? oscillation(text(j[i]["kind"], w + ".kind"), w + ".kind")
                                   : Oscillation::None;
    if (t.power < 0 || t.power > 2) schema_error(w, "power must be 0, 1 or 2");
    f.add(t);
  }
  return f;
}

FSpec fspec(const json& j, const std::string& where) {
  only_keys(j, where, {"kind", "branch", "f", "interval"});
  const std::string kind = j.contains("kind") ? text(j["kind"], where + ".kind") : "";
  FSpec f;
  if (kind == "exp") {
    f = FSpec::exp_y();
  } else if (kind == "half_square") {
    f = FSpec::half_square();
  } else if (kind == "custom") {
    if (!j.contains("f") || !j.contains("interval"))
      schema_error(where, "custom f needs 'f' and 'interval'");
    f = FSpec::custom_f(expr(j["f"], where + ".f", {"y"}), interval(j["interval"], where + ".interval"));
  } else {
    schema_error(where + ".kind", "must be exp, half_square or custom");
  }
  if (j.contains("branch")) {
    const std::string b = text(j["branch"], where + ".branch");
    if (b == "positive") f.branch = Branch::Positive;
    else if (b == "negative") f.branch = Branch::Negative;
    else schema_error(where + ".branch", "must be positive or negative");
  }
  return f;
}

void load_verify(const json& j, ProblemFile& pf) {
  only_keys(j, "verify", {"interval", "tol", "ic_tol", "exact", "sup_tol", "min_f", "rk_interval",
                          "rk_tol", "invariant", "drift_tol", "expect"});
  VerifySpec& v = pf.verify;
  if (j.contains("interval")) v.interval = interval(j["interval"], "verify.interval");
  if (j.contains("tol")) v.tol = number(j["tol"], "verify.tol");
  if (j.contains("ic_tol")) v.ic_tol = number(j["ic_tol"], "verify.ic_tol");
  if (j.contains("exact")) v.exact = expr(j["exact"], "verify.exact", {"x"});
  if (j.contains("sup_tol")) v.sup_tol = number(j["sup_tol"], "verify.sup_tol");
  if (j.contains("min_f")) v.min_f = number(j["min_f"], "verify.min_f");
  if (j.contains("rk_interval")) v.rk_interval = interval(j["rk_interval"], "verify.rk_interval");
  if (j.contains("rk_tol")) v.rk_tol = number(j["rk_tol"], "verify.rk_tol");
  if (j.contains("invariant")) v.invariant = expr(j["invariant"], "verify.invariant", {"x", "z", "zp"});
  if (j.contains("drift_tol")) v.drift_tol = number(j["drift_tol"], "verify.drift_tol");
  if (j.contains("expect")) {
    v.expect = text(j["expect"], "verify.expect");
    if (*v.expect != "exact" && *v.expect != "not_exact" && *v.expect != "exact_after_mu")
      schema_error("verify.expect", "must be exact, not_exact or exact_after_mu");
  }
}

void load_printed(const json& j, ProblemFile& pf) {
  only_keys(j, "printed", {"solution", "equation", "first_integral", "note"});
  if (j.contains("solution")) pf.printed.solution = expr(j["solution"], "printed.solution", {"x"});
  if (j.contains("equation"))
    pf.printed.equation = expr(j["equation"], "printed.equation", {"x", "y", "yp", "ypp"});
  if (j.contains("first_integral"))
    pf.printed.first_integral = expr(j["first_integral"], "printed.first_integral", {"x", "z", "zp"});
  if (j.contains("note")) pf.printed.note = text(j["note"], "printed.note");
}

ProblemClass problem_class(const std::string& s) {
  if (s == "chebyshev") return ProblemClass::Chebyshev;
  if (s == "linear_weighted") return ProblemClass::LinearWeighted;
  if (s == "ftype") return ProblemClass::FType;
  if (s == "quasilinear") return ProblemClass::QuasiLinear;
  if (s == "linear_ifactor") return ProblemClass::LinearIFactor;
  if (s == "functional") return ProblemClass::Functional;
  schema_error("class", "unknown class '" + s + "'");
}

const json& required(const json& j, const char* key) {
  if (!j.contains(key)) schema_error(key, "required");
  return j[key];
}

}  // namespace

std::string_view to_string(ProblemClass c) {
  switch (c) {
    case ProblemClass::Chebyshev: return "chebyshev";
    case ProblemClass::LinearWeighted: return "linear_weighted";
    case ProblemClass::FType: return "ftype";
    case ProblemClass::QuasiLinear: return "quasilinear";
    case ProblemClass::LinearIFactor: return "linear_ifactor";
    case ProblemClass::Functional: return "functional";
  }
  return "?";
}

ProblemFile parse_problem(const std::string& content, const std::string& fallback_name) {
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, "cli", "load_problem", e.what(),
                {static_cast<double>(e.byte)});
  }
  if (!j.is_object()) schema_error("file", "expected a JSON object");
  ProblemFile pf;
  pf.cls = problem_class(text(required(j, "class"), "class"));
  pf.name = j.contains("name") ? text(j["name"], "name") : fallback_name;
  if (pf.name.empty()) schema_error("name", "must not be empty");

  switch (pf.cls) {
    case ProblemClass::Chebyshev:
      only_keys(j, "file", {"name", "class", "description", "domain", "x0", "ics", "coefficients",
                            "equation", "tol", "verify", "printed", "p", "yp_coeff", "f"});
      break;
    case ProblemClass::LinearWeighted:
      only_keys(j, "file", {"name", "class", "description", "domain", "x0", "ics", "coefficients",
                            "equation", "tol", "verify", "printed", "P", "yp_coeff", "alpha",
                            "beta", "h", "forcing"});
      break;
    case ProblemClass::FType:
      only_keys(j, "file", {"name", "class", "description", "domain", "x0", "ics", "coefficients",
                            "equation", "tol", "verify", "printed", "fspec", "a2", "a1", "a0",
                            "forcing", "p", "yp_coeff"});
      break;
    case ProblemClass::QuasiLinear:
      only_keys(j, "file", {"name", "class", "description", "domain", "ics", "equation", "tol",
                            "verify", "printed", "a2", "a1", "a0", "mu", "box", "integrate_to",
                            "fspec"});
      break;
    case ProblemClass::LinearIFactor:
      only_keys(j, "file", {"name", "class", "description", "domain", "ics", "equation", "tol",
                            "verify", "printed", "a2", "a1", "a0", "h", "mu", "box",
                            "integrate_to"});
      break;
    case ProblemClass::Functional:
      only_keys(j, "file", {"name", "class", "description", "domain", "tol", "verify", "printed",
                            "p", "h", "ystar", "eta"});
      break;
  }

  if (j.contains("description")) pf.description = text(j["description"], "description");
  pf.domain = interval(required(j, "domain"), "domain");
  if (j.contains("x0")) pf.x0 = number(j["x0"], "x0");
  if (j.contains("tol")) pf.tol = number(j["tol"], "tol");
  if (j.contains("coefficients")) {
    const json& c = j["coefficients"];
    if (!c.is_array() || c.size() != 2) schema_error("coefficients", "expected [c1, c2]");
    pf.coefficients = std::array<double, 2>{number(c[0], "coefficients"), number(c[1], "coefficients")};
  }
  if (j.contains("equation"))
    pf.equation = expr(j["equation"], "equation", {"x", "y", "yp", "ypp"});
  if (j.contains("ics")) {
    const json& c = j["ics"];
    if (pf.cls == ProblemClass::QuasiLinear) {
      only_keys(c, "ics", {"x", "z", "zp"});
      pf.zics = Point3{number(required(c, "x"), "ics.x"), number(required(c, "z"), "ics.z"),
                       number(required(c, "zp"), "ics.zp")};
    } else {
      only_keys(c, "ics", {"x", "y", "yp"});
      pf.ics = InitialConditions{number(required(c, "x"), "ics.x"), number(required(c, "y"), "ics.y"),
                                 number(required(c, "yp"), "ics.yp")};
    }
  }

  const std::initializer_list<std::string> X{"x"}, XZ{"x", "z", "zp"};
  switch (pf.cls) {
    case ProblemClass::Chebyshev:
      pf.p = expr(required(j, "p"), "p", X);
      pf.yp_coeff = expr(required(j, "yp_coeff"), "yp_coeff", X);
      pf.f = expr(required(j, "f"), "f", {"y", "v"});
      break;
    case ProblemClass::LinearWeighted:
      pf.p = expr(required(j, "P"), "P", X);
      pf.yp_coeff = expr(required(j, "yp_coeff"), "yp_coeff", X);
      pf.alpha = j.contains("alpha") ? number(j["alpha"], "alpha") : 0.0;
      pf.beta = number(required(j, "beta"), "beta");
      pf.h = j.contains("h") ? expr(j["h"], "h", X) : Expr(0.0);
      if (j.contains("forcing")) pf.forcing = forcing(j["forcing"], "forcing");
      break;
    case ProblemClass::FType:
      pf.fspec = fspec(required(j, "fspec"), "fspec");
      pf.has_fspec = true;
      if (j.contains("p")) {
        pf.weighted = true;
        pf.p = expr(j["p"], "p", X);
        pf.yp_coeff = expr(required(j, "yp_coeff"), "yp_coeff", X);
        pf.cc[2] = number(required(j, "a0"), "a0");
        if (j.contains("a2") || j.contains("a1") || j.contains("forcing"))
          schema_error("file", "weighted f-type takes p, yp_coeff and a0 only");
      } else {
        pf.cc = {number(required(j, "a2"), "a2"), j.contains("a1") ? number(j["a1"], "a1") : 0.0,
                 j.contains("a0") ? number(j["a0"], "a0") : 0.0};
        if (j.contains("forcing")) pf.forcing = forcing(j["forcing"], "forcing");
        if (j.contains("yp_coeff")) schema_error("yp_coeff", "only valid with p");
      }
      break;
    case ProblemClass::QuasiLinear:
    case ProblemClass::LinearIFactor: {
      const auto vars = pf.cls == ProblemClass::QuasiLinear ? XZ : X;
      pf.a2 = expr(required(j, "a2"), "a2", vars);
      pf.a1 = expr(required(j, "a1"), "a1", vars);
      pf.a0 = expr(required(j, "a0"), "a0", vars);
      if (pf.cls == ProblemClass::LinearIFactor) pf.h = j.contains("h") ? expr(j["h"], "h", X) : Expr(0.0);
      if (j.contains("mu")) pf.mu = expr(j["mu"], "mu", XZ);
      if (j.contains("box")) {
        only_keys(j["box"], "box", {"x", "z", "zp"});
        pf.box = Box{interval(required(j["box"], "x"), "box.x"), interval(required(j["box"], "z"), "box.z"),
                     interval(required(j["box"], "zp"), "box.zp")};
      }
      if (j.contains("integrate_to")) pf.integrate_to = number(j["integrate_to"], "integrate_to");
      if (j.contains("fspec")) {
        pf.fspec = fspec(j["fspec"], "fspec");
        pf.has_fspec = true;
      }
      break;
    }
    case ProblemClass::Functional: {
      pf.p = expr(required(j, "p"), "p", X);
      pf.h = expr(required(j, "h"), "h", {"y"});
      pf.ystar = expr(required(j, "ystar"), "ystar", X);
      const json& e = required(j, "eta");
      if (!e.is_array() || e.empty()) schema_error("eta", "expected a non-empty array");
      for (std::size_t i = 0; i < e.size(); ++i)
        pf.etas.push_back(expr(e[i], "eta[" + std::to_string(i) + "]", X));
      break;
    }
  }
  if (j.contains("verify")) load_verify(j["verify"], pf);
  if (j.contains("printed")) load_printed(j["printed"], pf);
  return pf;
}

ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cli", "load_problem", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ProblemFile pf = parse_problem(ss.str(), path.stem().string());
  pf.source = path;
  return pf;
}

OdeProblem ProblemFile::ode_problem() const {
  OdeProblem pr;
  if (cls == ProblemClass::Chebyshev) {
    pr.spec = ChebyshevSpec{p, yp_coeff, f};
  } else if (cls == ProblemClass::LinearWeighted) {
    pr.spec = LinearWeightedSpec{p, yp_coeff, alpha, beta, h, forcing};
  } else {
    throw Error(ErrorCode::InvalidInput, "cli", "dispatch",
                "class " + std::string(to_string(cls)) + " is not a Chebyshev-type problem");
  }
  pr.domain = domain;
  pr.x0 = x0;
  pr.ics = ics;
  return pr;
}

FTypeProblem ProblemFile::ftype_problem() const {
  if (cls != ProblemClass::FType)
    throw Error(ErrorCode::InvalidInput, "cli", "dispatch", "not an f-type problem");
  FTypeProblem pr;
  if (weighted) pr.spec = FWeighted{p, yp_coeff, cc[2]};
  else pr.spec = FConstantCoeff{cc[0], cc[1], cc[2], forcing};
  pr.fspec = fspec;
  pr.domain = domain;
  pr.x0 = x0;
  pr.ics = ics;
  pr.coefficients = coefficients;
  pr.literal_equation = equation;
  return pr;
}

QuasiLinearOde ProblemFile::quasilinear() const {
  if (cls == ProblemClass::QuasiLinear) return QuasiLinearOde{a2, a1, a0, domain, zics};
  if (cls == ProblemClass::LinearIFactor) {
    QuasiLinearOde q = linear_to_quasilinear(a2, a1, a0, h, domain);
    if (ics) q.ics = Point3{ics->x, ics->y, ics->yp};
    return q;
  }
  throw Error(ErrorCode::InvalidInput, "cli", "dispatch", "not a quasi-linear problem");
}

}  // namespace secord::cli
