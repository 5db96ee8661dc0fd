#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "secord/exactness.hpp"
#include "secord/forcing.hpp"
#include "secord/fsubst.hpp"
#include "secord/reduction.hpp"

namespace secord::cli {

enum class ProblemClass { Chebyshev, LinearWeighted, FType, QuasiLinear, LinearIFactor, Functional };

std::string_view to_string(ProblemClass c);

/// Checks requested by the problem file beyond the residual test.
struct VerifySpec {
  std::optional<Interval> interval;
  std::optional<double> tol;            // residual tolerance, default 1e-6
  std::optional<double> ic_tol;
  std::optional<Expr> exact;            // y(x)
  double sup_tol = 1e-7;
  std::optional<double> min_f;          // residual only where f(y) >= min_f
  std::optional<Interval> rk_interval;  // compare with an independent integration
  double rk_tol = 1e-6;
  std::optional<Expr> invariant;        // closed-form first integral in x, z, zp
  double drift_tol = 1e-6;
  std::optional<std::string> expect;    // exact | not_exact | exact_after_mu
};

/// Statements quoted from the source of an example. They are tested and the
/// outcome reported, but never counted towards pass/fail.
struct Printed {
  std::optional<Expr> solution;        // y(x)
  std::optional<Expr> equation;        // G(x, y, yp, ypp) checked against verify.exact
  std::optional<Expr> first_integral;  // in x, z, zp
  std::string note;
};

struct ProblemFile {
  std::string name;
  std::string description;
  ProblemClass cls = ProblemClass::Chebyshev;
  std::filesystem::path source;

  Interval domain;
  std::optional<double> x0;
  std::optional<InitialConditions> ics;
  std::optional<Point3> zics;
  std::optional<std::array<double, 2>> coefficients;
  std::optional<Expr> equation;  // literal G(x, y, yp, ypp) = 0
  std::optional<double> tol;

  // chebyshev: p, yp_coeff, f(y, v); linear_weighted: P (in p), yp_coeff, alpha, beta, h, forcing
  Expr p;
  Expr yp_coeff;
  Expr f;
  double alpha = 0.0;
  double beta = 0.0;
  Expr h;
  ForcingSpec forcing;

  // ftype
  FSpec fspec;
  bool has_fspec = false;
  bool weighted = false;
  std::array<double, 3> cc{1.0, 0.0, 0.0};  // a2, a1, a0

  // quasilinear and linear_ifactor
  Expr a2, a1, a0;
  std::optional<Expr> mu;
  std::optional<Box> box;
  std::optional<double> integrate_to;

  // functional
  Expr ystar;
  std::vector<Expr> etas;

  VerifySpec verify;
  Printed printed;

  OdeProblem ode_problem() const;
  FTypeProblem ftype_problem() const;
  QuasiLinearOde quasilinear() const;
};

ProblemFile load_problem(const std::filesystem::path& path);
ProblemFile parse_problem(const std::string& text, const std::string& fallback_name);

}  // namespace secord::cli
