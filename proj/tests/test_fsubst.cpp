#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "secord/error.hpp"
#include "secord/fsubst.hpp"
#include "secord/verify.hpp"

using namespace secord;

namespace {

Expr eqn(std::string_view s) { return parse(s, {"x", "y", "yp", "ypp"}); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidInput;
}

FTypeProblem langmuir() {
  FTypeProblem p;
  p.spec = FConstantCoeff{3.0, 4.0, 2.0, ForcingSpec::constant(1.0)};
  p.fspec = FSpec::half_square(Branch::Positive);
  p.domain = {-6, 12};
  p.x0 = 0.0;
  p.literal_equation = eqn("3*y*ypp + 3*yp^2 + 4*y*yp + y^2 - 1");
  return p;
}

FTypeProblem exp_ivp(double w) {
  FTypeProblem p;
  ForcingSpec g;
  g.add({1.0, 0, 0, w, Oscillation::Cos});
  p.spec = FConstantCoeff{1.0, 0.0, 1.0, g};
  p.fspec = FSpec::exp_y();
  p.domain = {-1, 1};
  p.ics = InitialConditions{0, 0, 0};
  p.literal_equation = eqn("(ypp + yp^2)*exp(y) + exp(y) - cos(" + std::to_string(w) + "*x)");
  return p;
}

}  // namespace

TEST(FSpec, Inversion) {
  EXPECT_EQ(invert_f(FSpec::exp_y(), 1.0), 0.0);
  EXPECT_EQ(invert_f(FSpec::half_square(Branch::Positive), 2.0), 2.0);
  EXPECT_EQ(invert_f(FSpec::half_square(Branch::Negative), 2.0), -2.0);
  EXPECT_EQ(code_of([] { invert_f(FSpec::half_square(), 2.0); }), ErrorCode::BranchRequired);
  EXPECT_EQ(code_of([] { invert_f(FSpec::exp_y(), 0.0); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { invert_f(FSpec::half_square(Branch::Positive), -1.0); }),
            ErrorCode::OutOfRange);
  const FSpec c = FSpec::custom_f(parse("y^3 + y", {"y"}), {-2, 2});
  EXPECT_NEAR(invert_f(c, 2.0), 1.0, 1e-12);
  EXPECT_EQ(code_of([&] { invert_f(c, 11.0); }), ErrorCode::OutOfRange);
}

TEST(FSpec, InverseDerivatives) {
  const Dual2 g = invert_f_derivs(FSpec::exp_y(), 2.0);
  EXPECT_NEAR(g.value, std::log(2.0), 1e-15);
  EXPECT_NEAR(g.d1, 0.5, 1e-15);
  EXPECT_NEAR(g.d2, -0.25, 1e-15);
}

TEST(FSpec, CustomMustBeMonotone) {
  EXPECT_EQ(code_of([] { FSpec::custom_f(parse("y^2", {"y"}), {-1, 1}).validate(); }),
            ErrorCode::InvalidInput);
  EXPECT_NO_THROW(FSpec::custom_f(parse("sinh(y)", {"y"}), {-3, 3}).validate());
}

TEST(Property, SubstitutionIdentity) {
  for (const FSpec& f : {FSpec::exp_y(), FSpec::half_square(Branch::Positive),
                         FSpec::half_square(Branch::Negative),
                         FSpec::custom_f(parse("atan(y) + y", {"y"}), {-3, 3}),
                         FSpec::custom_f(parse("ln(y)", {"y"}), {0.5, 4})})
    EXPECT_LE(substitution_identity_error(f, 200), 1e-9) << f.text();
}

TEST(Property, InversionRoundTrip) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-3, 3), pos(1e-3, 4);
  const FSpec c = FSpec::custom_f(parse("atan(y) + y", {"y"}), {-3, 3});
  for (int i = 0; i < 200; ++i) {
    const double y = u(rng), yp = pos(rng);
    EXPECT_NEAR(invert_f(FSpec::exp_y(), std::exp(y)), y, 1e-10 * (1 + std::abs(y)));
    EXPECT_NEAR(invert_f(c, c(y)), y, 1e-10 * (1 + std::abs(y)));
    const FSpec hp = FSpec::half_square(Branch::Positive), hn = FSpec::half_square(Branch::Negative);
    EXPECT_NEAR(invert_f(hp, hp(yp)), yp, 1e-10 * yp);
    EXPECT_NEAR(invert_f(hn, hn(-yp)), -yp, 1e-10 * yp);
  }
}

TEST(Substitution, ConstantCoefficientLangmuir) {
  const LinearZProblem z = apply_substitution(langmuir());
  EXPECT_EQ(z.text, "3*z_xx + 4*z_x + 2*z = 1");
  const auto& g = std::get<GeneralSolution>(z.form);
  EXPECT_NEAR(g.alpha, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(g.beta, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(evaluate(g.particular, Env{{"x", 3.0}}), 0.5, 1e-15);
}

TEST(Substitution, ExponentialIvp) {
  const LinearZProblem z = apply_substitution(exp_ivp(2.0));
  EXPECT_EQ(z.text, "z_xx + z = cos(2*x)");
  ASSERT_TRUE(z.ics);
  EXPECT_EQ(z.ics->y, 1.0);
  EXPECT_EQ(z.ics->yp, 0.0);
}

TEST(Substitution, WeightedExponential) {
  FTypeProblem p;
  p.spec = FWeighted{parse("1-x^2", {"x"}), parse("-x", {"x"}), 4.0};
  p.fspec = FSpec::exp_y();
  p.domain = {-1, 1};
  p.ics = InitialConditions{0, 0, 0};
  p.literal_equation = eqn("(1-x^2)*(ypp + yp^2)*exp(y) + 0.5*(-2*x)*yp*exp(y) + 4*exp(y)");
  const LinearZProblem z = apply_substitution(p);
  EXPECT_EQ(z.text, "(1 - x^2)*z_xx + (-x)*z_x + 4*z = 0");
  EXPECT_TRUE(std::holds_alternative<OdeProblem>(z.form));
}

TEST(Substitution, RejectsOriginalLangmuir) {
  FTypeProblem p = langmuir();
  p.literal_equation = eqn("3*y*ypp + yp^2 + 4*y*yp + y^2 - 1");
  EXPECT_EQ(code_of([&] { apply_substitution(p); }), ErrorCode::StructureMismatch);
}

TEST(Substitution, BranchFromInitialValue) {
  FTypeProblem p = langmuir();
  p.fspec = FSpec::half_square();
  EXPECT_EQ(code_of([&] { apply_substitution(p); }), ErrorCode::BranchRequired);
  p.ics = InitialConditions{0, -1.0, 0.2};
  EXPECT_EQ(apply_substitution(p).fspec.branch, Branch::Negative);
}

TEST(SolveFType, LangmuirFreeConstants) {
  FTypeProblem p = langmuir();
  p.coefficients = std::array<double, 2>{1.0, 0.0};
  const FTypeSolution s = solve_f_type(p);
  ASSERT_EQ(s.y.size(), 1u);
  const ClosedForm& y = s.y[0];
  const double r2 = std::sqrt(2.0) / 3;
  for (double x : {-2.0, 0.0, 1.0, 5.0, 9.0}) {
    const double z = std::exp(-2 * x / 3) * std::cos(r2 * x) + 0.5;
    EXPECT_NEAR(y(x) * y(x), 2 * z, 1e-10) << x;
  }
  // z turns negative a little below x = -3.33, where cos(sqrt(2) x / 3) changes sign
  ASSERT_FALSE(s.range_violations.empty());
  EXPECT_LT(y.valid.lo, -3.0);
  EXPECT_TRUE(y.singular_lo);
  EXPECT_EQ(y.chain().size(), 2u);
}

TEST(SolveFType, ExponentialIvpMatchesClosedForm) {
  const FTypeSolution s = solve_f_type(exp_ivp(2.0));
  ASSERT_EQ(s.y.size(), 1u);
  const ClosedForm& y = s.y[0];
  const Dual2 j = y.jet(0.0);
  EXPECT_NEAR(j.value, 0.0, 1e-12);
  EXPECT_NEAR(j.d1, 0.0, 1e-12);
  for (double x : {-0.9, 0.2, 0.7, 1.0})
    EXPECT_NEAR(y(x), std::log((std::cos(2 * x) - 4 * std::cos(x)) / -3.0), 1e-12);
  const auto rep = residual_check(y, exp_ivp(2.0).y_equation(), {0, 1}, {}, InitialConditions{0, 0, 0});
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.max_abs, 1e-7);
}

TEST(SolveFType, TrivialDynamics) {
  FTypeProblem p;
  p.spec = FConstantCoeff{1.0, 0.0, 0.0, {}};
  p.fspec = FSpec::exp_y();
  p.domain = {-2, 2};
  p.ics = InitialConditions{0, 0, 0};
  const FTypeSolution s = solve_f_type(p);
  for (double x : {-2.0, 0.0, 1.5}) EXPECT_NEAR(s.y[0](x), 0.0, 1e-15);
}

TEST(SolveFType, WeightedRangeTrim) {
  FTypeProblem p;
  p.spec = FWeighted{parse("1-x^2", {"x"}), parse("-x", {"x"}), 4.0};
  p.fspec = FSpec::exp_y();
  p.domain = {-1, 1};
  p.ics = InitialConditions{0, 0, 0};
  const FTypeSolution s = solve_f_type(p);
  ASSERT_EQ(s.y.size(), 1u);
  const ClosedForm& y = s.y[0];
  // z = cos(2 asin x) = 1 - 2x^2 > 0 only for |x| < 1/sqrt(2)
  EXPECT_NEAR(y.valid.lo, -std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(y.valid.hi, std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(y(0.3), std::log(1 - 2 * 0.09), 1e-9);
  const auto rep = residual_check(y, p.y_equation(), y.valid);
  EXPECT_TRUE(rep.pass) << rep.max_scaled;
}
