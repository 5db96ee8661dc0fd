#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "secord/error.hpp"
#include "secord/verify.hpp"

using namespace secord;

namespace {

Expr eqn(std::string_view s) { return parse(s, {"x", "y", "yp", "ypp"}); }

ClosedForm cf(std::string_view body, Interval valid) {
  return ClosedForm::from_expr(parse(body, {"x"}), "x", valid);
}

const double kPi = std::numbers::pi;

}  // namespace

TEST(Residual, ArcsineSolutionAwayFromPole) {
  // pole of 1/(2(asin x + 1)) at x = -sin 1
  ClosedForm y = cf("1/(2*(asin(x)+1))", {-std::sin(1.0) + 0.02, 1});
  y.singular_hi = true;
  const auto eq = SecondOrderEquation::from_expr(eqn("(1-x^2)*ypp - x*yp + 4*sqrt(1-x^2)*yp*y"));
  const auto rep = residual_check(y, eq, {-0.9, 0.9}, {}, InitialConditions{0, 0.5, -0.5});
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.max_scaled, 1e-8);
  EXPECT_EQ(rep.checked.lo, -std::sin(1.0) + 0.02);
  EXPECT_EQ(rep.checked.hi, 0.9);
  ASSERT_TRUE(rep.ic_error);
  EXPECT_LE((*rep.ic_error)[0], 1e-15);
}

TEST(Residual, ChebyshevPolynomial) {
  ClosedForm y = cf("cos(3*asin(x))", {-1, 1});
  y.singular_lo = y.singular_hi = true;
  const auto eq = SecondOrderEquation::from_expr(eqn("(1-x^2)*ypp - x*yp + 9*y"));
  const auto rep = residual_check(y, eq, {-1, 1});
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.max_abs, 1e-8);
  EXPECT_NEAR(rep.checked.lo, -1 + 2e-3, 1e-15);
  // with -2x the polynomial is no longer a solution
  const auto printed = SecondOrderEquation::from_expr(eqn("(1-x^2)*ypp - 2*x*yp + 9*y"));
  EXPECT_FALSE(residual_check(y, printed, {-0.9, 0.9}).pass);
}

TEST(Residual, ZeroSolution) {
  const ClosedForm y = cf("0", {-10, 10});
  const auto rep = residual_check(y, SecondOrderEquation::from_expr(eqn("ypp + y")), {0, 5});
  EXPECT_EQ(rep.max_abs, 0.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.evaluated, 257u);
}

TEST(Residual, FailureDetected) {
  const ClosedForm y = cf("sin(1.01*x)", {-10, 10});
  const auto rep = residual_check(y, SecondOrderEquation::from_expr(eqn("ypp + y")), {0, 5});
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.max_scaled, 1e-3);
}

TEST(Residual, InitialConditionMismatchFails) {
  const ClosedForm y = cf("sin(x)", {-10, 10});
  const auto rep = residual_check(y, SecondOrderEquation::from_expr(eqn("ypp + y")), {0, 5}, {},
                                  InitialConditions{0, 0, 2});
  EXPECT_LE(rep.max_scaled, 1e-12);
  EXPECT_FALSE(rep.pass);
}

TEST(Residual, EmptyGridAfterTrim) {
  const ClosedForm y = cf("x", {0, 1});
  try {
    residual_check(y, SecondOrderEquation::from_expr(eqn("ypp")), {2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGridAfterTrim);
  }
}

TEST(Residual, IncludePredicateSkipsPoints) {
  const ClosedForm y = cf("abs(x)", {-1, 1});
  ResidualOptions o;
  o.include = [](double x) { return std::abs(x) > 0.01; };
  const auto rep = residual_check(y, SecondOrderEquation::from_expr(eqn("ypp")), {-1, 1}, o);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.evaluated, 257u);
}

TEST(Integrate, EquationFromInterior) {
  const auto eq = SecondOrderEquation::from_expr(eqn("x^2*ypp + x*yp - 3*y^2"));
  const Trajectory tr = integrate_equation(eq, {1, 2, 4}, 0.8, 1.5, 1e-10);
  EXPECT_EQ(tr.x_min(), 0.8);
  for (double x : {0.8, 1.2, 1.5}) EXPECT_NEAR(tr.at(x).value, 2 / std::pow(1 - std::log(x), 2), 1e-7);
  try {
    integrate_equation(SecondOrderEquation::from_expr(eqn("x*ypp + y")), {1, 1, 0}, -1, 2, 1e-9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::StepSizeUnderflow ||
                e.code() == ErrorCode::LeadingCoefficientVanished);
  }
}

TEST(Functional, Values) {
  const Expr one = parse("1", {"x"}), zero = parse("0", {"y"}), sq = parse("y^2", {"y"});
  EXPECT_NEAR(functional_value(one, zero, cf("x", {0, 1}), {0, 1}), 1.0, 1e-12);
  EXPECT_EQ(functional_value(one, zero, cf("3", {0, 1}), {0, 1}), 0.0);
  // sinh/sinh(1): integral of cosh^2 + sinh^2 over sinh(1)^2 = sinh(2)/2 / sinh(1)^2
  const double q = functional_value(one, sq, cf("sinh(x)/sinh(1)", {0, 1}), {0, 1});
  EXPECT_NEAR(q, std::sinh(2.0) / 2 / std::pow(std::sinh(1.0), 2), 1e-9);
  try {
    functional_value(parse("x-2", {"x"}), zero, cf("x", {0, 1}), {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainError);
  }
}

TEST(Stationarity, EulerLagrangeSolution) {
  const Expr p = parse("1", {"x"}), h = parse("y^2", {"y"});
  const ClosedForm ystar = cf("sinh(x)/sinh(1)", {0, 1});
  for (int k = 1; k <= 5; ++k) {
    const ClosedForm eta =
        ClosedForm::from_expr(call(Fn::Sin, Expr(k * kPi) * Expr::variable("x")), "x", {0, 1});
    const StationarityReport r = stationarity_check(p, h, ystar, eta, {0, 1});
    EXPECT_TRUE(r.precondition_ok) << k;
    EXPECT_LE(std::abs(r.derivative), 1e-6) << k;
  }
}

TEST(Stationarity, ZeroPerturbation) {
  const Expr p = parse("1", {"x"}), h = parse("y^2", {"y"});
  const StationarityReport r =
      stationarity_check(p, h, cf("sinh(x)/sinh(1)", {0, 1}), cf("0", {0, 1}), {0, 1});
  EXPECT_EQ(r.derivative, 0.0);
}

TEST(Stationarity, NegativeControl) {
  const Expr p = parse("1", {"x"}), h = parse("y^2", {"y"});
  const ClosedForm bad = cf("x^2", {0, 1});
  const ClosedForm eta = ClosedForm::from_expr(call(Fn::Sin, Expr(kPi) * Expr::variable("x")), "x", {0, 1});
  try {
    stationarity_check(p, h, bad, eta, {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionFailed);
  }
  StationarityOptions o;
  o.force = true;
  const StationarityReport r = stationarity_check(p, h, bad, eta, {0, 1}, o);
  EXPECT_TRUE(r.forced);
  EXPECT_GE(std::abs(r.derivative), 1e-3);
}

TEST(Stationarity, PerturbationMustVanishAtEnds) {
  const Expr p = parse("1", {"x"}), h = parse("y^2", {"y"});
  try {
    stationarity_check(p, h, cf("sinh(x)/sinh(1)", {0, 1}), cf("cos(x)", {0, 1}), {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionFailed);
  }
}

TEST(Property, StationarityOverSineFamily) {
  const Expr p = parse("1", {"x"}), h = parse("y^2", {"y"});
  const ClosedForm ystar = cf("sinh(x)/sinh(1)", {0, 1});
  int passed = 0;
  for (int k = 1; k <= 5; ++k) {
    const ClosedForm eta =
        ClosedForm::from_expr(call(Fn::Sin, Expr(k * kPi) * Expr::variable("x")), "x", {0, 1});
    if (std::abs(stationarity_check(p, h, ystar, eta, {0, 1}).derivative) <= 1e-6) ++passed;
  }
  EXPECT_EQ(passed, 5);
}
