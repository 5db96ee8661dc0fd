#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "secord/closed_form.hpp"
#include "secord/error.hpp"
#include "secord/reduction.hpp"

using namespace secord;

namespace {

Expr px(std::string_view s) { return parse(s, {"x"}); }
Expr pyv(std::string_view s) { return parse(s, {"y", "v"}); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidInput;
}

void expect_roundtrip(const TransformMap& m, unsigned seed) {
  std::mt19937 rng(seed);
  const Interval d = m.domain();
  std::uniform_real_distribution<double> u(d.lo, d.hi);
  for (int i = 0; i < 100; ++i) {
    double x = u(rng);
    if (x == d.lo) continue;
    const double back = m.invert(m(x));
    EXPECT_LE(std::abs(back - x), 1e-9 * std::max(1.0, std::abs(x))) << "x = " << x;
  }
}

void expect_monotone(const TransformMap& m) {
  const auto ts = m.knots_t();
  ASSERT_GE(ts.size(), TransformMap::kMinSegments + 1);
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) ASSERT_LT(ts[k], ts[k + 1]) << k;
}

}  // namespace

TEST(Transform, ArcsineMap) {
  const TransformMap m = TransformMap::build(px("1-x^2"), WeightMode::SqrtP, {-1, 1}, 0.0);
  EXPECT_NEAR(m(0.5), std::numbers::pi / 6, 1e-10);
  EXPECT_EQ(m(0.0), 0.0);
  EXPECT_NEAR(m.invert(std::numbers::pi / 6), 0.5, 1e-10);
  EXPECT_EQ(m.invert(0.0), 0.0);
  EXPECT_TRUE(m.singular_lo());
  EXPECT_TRUE(m.singular_hi());
  EXPECT_NEAR(m.t_range().lo, -std::numbers::pi / 2, 1e-8);
  EXPECT_NEAR(m.t_range().hi, std::numbers::pi / 2, 1e-8);
  EXPECT_EQ(code_of([&] { m.invert(2.0); }), ErrorCode::OutOfRange);
  expect_monotone(m);
  expect_roundtrip(m, 1);
}

TEST(Transform, LogarithmMap) {
  const TransformMap m = TransformMap::build(px("x^2"), WeightMode::SqrtP, {0.5, 4}, 1.0);
  EXPECT_NEAR(m(std::exp(1.0)), 1.0, 1e-10);
  EXPECT_NEAR(m.invert(1.0), std::exp(1.0), 1e-9);
  EXPECT_FALSE(m.singular_lo());
  expect_monotone(m);
  expect_roundtrip(m, 2);
}

TEST(Transform, SquareRootMapFromSingularEnd) {
  const TransformMap m = TransformMap::build(px("4*x"), WeightMode::SqrtP, {0, 5}, 0.0);
  EXPECT_NEAR(m(4.0), 2.0, 1e-10);
  EXPECT_NEAR(m(0.01), 0.1, 1e-10);
  EXPECT_EQ(m(0.0), 0.0);
  EXPECT_TRUE(m.singular_lo());
  expect_monotone(m);
  expect_roundtrip(m, 3);
}

TEST(Transform, DirectWeight) {
  const TransformMap m = TransformMap::build(px("sqrt(x*(1-x))"), WeightMode::DirectP, {0, 1}, 0.5);
  for (double x : {0.01, 0.2, 0.5, 0.77, 0.999})
    EXPECT_NEAR(m(x), std::asin(2 * x - 1), 1e-9) << x;
  const Dual2 j = m.jet(0.3);
  EXPECT_NEAR(j.d1, 1 / std::sqrt(0.3 * 0.7), 1e-12);
  expect_roundtrip(m, 4);
}

TEST(Transform, InterpolantCheckedAgainstQuadrature) {
  const TransformMap m = TransformMap::build(px("1+x^2"), WeightMode::SqrtP, {-2, 3}, 0.0);
  EXPECT_LE(m.interpolation_error(), 1e-9);
  EXPECT_NEAR(m.interpolate(1.3), std::asinh(1.3), 1e-9);
  EXPECT_NEAR(m(1.3), std::asinh(1.3), 1e-12);
}

TEST(Transform, Errors) {
  EXPECT_EQ(code_of([] { TransformMap::build(px("x"), WeightMode::SqrtP, {-1, 1}, 0.5); }),
            ErrorCode::NonPositiveWeight);
  EXPECT_EQ(code_of([] { TransformMap::build(px("x^2"), WeightMode::SqrtP, {0, 1}, 0.5); }),
            ErrorCode::DivergentIntegral);
}

TEST(Reduce, AutonomousArcsine) {
  OdeProblem pr;
  pr.spec = ChebyshevSpec{px("1-x^2"), px("-x"), pyv("4*y*v")};
  pr.domain = {-1, 1};
  pr.ics = InitialConditions{0, 0.5, -0.5};
  const ReducedOde r = reduce_problem(pr);
  EXPECT_EQ(r.form, ReducedOde::Form::Autonomous);
  EXPECT_EQ(r.text(), "y_tt + 4*y*y_t = 0");
  ASSERT_TRUE(r.ics);
  EXPECT_EQ(r.ics->t, 0.0);
  EXPECT_EQ(r.ics->y, 0.5);
  EXPECT_EQ(r.ics->v, -0.5);
}

TEST(Reduce, AutonomousQuadratic) {
  OdeProblem pr;
  pr.spec = ChebyshevSpec{px("x^2"), px("x"), pyv("-3*y^2")};
  pr.domain = {0.5, 3};
  pr.ics = InitialConditions{1, 2, 4};
  const ReducedOde r = reduce_problem(pr);
  EXPECT_EQ(r.text(), "y_tt - 3*y^2 = 0");
  EXPECT_FALSE(r.depends_on_velocity());
  EXPECT_EQ(r.ics->y, 2.0);
  EXPECT_NEAR(r.ics->v, 4.0, 1e-15);
}

TEST(Reduce, CauchyEuler) {
  const double alpha = 2.0, beta = 3.0;
  OdeProblem pr;
  pr.spec = LinearWeightedSpec{px("x"), px("(2+1)*x"), alpha, beta, Expr(0.0), {}};
  pr.domain = {0.1, 10};
  pr.x0 = 1.0;
  const ReducedOde r = reduce_problem(pr);
  EXPECT_EQ(r.form, ReducedOde::Form::LinearCC);
  EXPECT_EQ(r.alpha, alpha);
  EXPECT_EQ(r.beta, beta);
  EXPECT_NEAR((*r.tmap)(std::exp(1.5)), 1.5, 1e-10);
}

TEST(Reduce, AffineChebyshevBecomesLinear) {
  OdeProblem pr;
  pr.spec = ChebyshevSpec{px("1-x^2"), px("-x"), pyv("9*y")};
  pr.domain = {-1, 1};
  const ReducedOde r = reduce_problem(pr);
  EXPECT_EQ(r.form, ReducedOde::Form::LinearCC);
  EXPECT_EQ(r.alpha, 0.0);
  EXPECT_EQ(r.beta, 9.0);
}

TEST(Reduce, PatternRejectsPerturbedCoefficient) {
  OdeProblem pr;
  pr.spec = ChebyshevSpec{px("1-x^2"), px("0.6*(-2*x)"), pyv("4*y*v")};
  pr.domain = {-1, 1};
  pr.ics = InitialConditions{0, 0.5, -0.5};
  try {
    reduce_problem(pr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StructureMismatch);
    EXPECT_EQ(e.point().size(), 1u);
  }
  OdeProblem lw;
  lw.spec = LinearWeightedSpec{px("x"), px("0.6*x"), 0.0, 1.0, Expr(0.0), {}};
  lw.domain = {0.5, 2};
  EXPECT_EQ(code_of([&] { reduce_problem(lw); }), ErrorCode::StructureMismatch);
}

TEST(Reduce, ForcingMustMatchInTransformedVariable) {
  ForcingSpec H = ForcingSpec::constant(1.0);
  H.add({1.0, 0, 0, 1.0, Oscillation::Sin});
  OdeProblem pr;
  pr.spec = LinearWeightedSpec{px("sqrt(x*(1-x))"), px("0.5*(1-2*x)"), 0.0, 4.0, px("2*x"), H};
  pr.domain = {0, 1};
  pr.x0 = 0.5;
  const ReducedOde r = reduce_problem(pr);
  EXPECT_EQ(r.text(), "y_tt + 4*y = 1 + sin(t)");

  auto bad = pr;
  std::get<LinearWeightedSpec>(bad.spec).h = px("2*x + 0.01");
  EXPECT_EQ(code_of([&] { reduce_problem(bad); }), ErrorCode::StructureMismatch);
}

TEST(Reduce, InitialConditionTransferAndComposition) {
  OdeProblem pr;
  pr.spec = ChebyshevSpec{px("x^2"), px("x"), pyv("-3*y^2")};
  pr.domain = {0.5, 2.5};
  pr.ics = InitialConditions{1, 2, 4};
  const ReducedOde r = reduce_problem(pr);
  const Expr Y = parse("2/(1-t)^2", {"t"});
  const Dual2 y0 = differentiate(Y, "t", Env{{"t", 0}});
  EXPECT_EQ(y0.value, 2.0);
  EXPECT_EQ(y0.d1, 4.0);
  const ClosedForm y =
      compose_solution(ClosedForm::from_expr(Y, "t", {-10, 0.99}), r.tmap);
  const Dual2 j = y.jet(1.0);
  EXPECT_NEAR(j.value, 2.0, 1e-10);
  EXPECT_NEAR(j.d1, 4.0, 1e-10);
  EXPECT_NEAR(y(2.0), 2 / std::pow(1 - std::log(2.0), 2), 1e-9);
}

TEST(Energy, QuadraticForce) {
  // y_tt - 3 y^2 = 0 from (2, 4): v^2 = 2 y^3
  const EnergyIntegral e = energy_first_integral(parse("-3*y^2", {"y"}), 2.0, 4.0);
  EXPECT_NEAR(e.velocity(2.0), 4.0, 1e-12);
  for (double y : {2.0, 2.5, 3.0, 5.0}) EXPECT_NEAR(e.velocity_squared(y), 2 * y * y * y, 1e-9 * y * y * y);
  for (double t : {0.0, 0.2, 0.5}) {
    const double Y = 2 / std::pow(1 - t, 2), V = 4 / std::pow(1 - t, 3);
    EXPECT_NEAR(e.defect(Y, V), 0.0, 1e-9 * V * V);
  }
}

TEST(Energy, HarmonicAndFree) {
  const EnergyIntegral h = energy_first_integral(parse("y", {"y"}), 0.8, 0.0);
  EXPECT_NEAR(h.velocity_squared(0.3), 0.64 - 0.09, 1e-12);
  EXPECT_LT(h.sign(), 0.0);
  const EnergyIntegral f = energy_first_integral(Expr(0.0), 1.0, -2.5);
  EXPECT_EQ(f.velocity(7.0), -2.5);
  EXPECT_EQ(code_of([&] { h.velocity(2.0); }), ErrorCode::NegativeRadicand);
}
