#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "secord/error.hpp"
#include "secord/exactness.hpp"
#include "secord/verify.hpp"

using namespace secord;

namespace {

Expr q(std::string_view s) { return parse(s, {"x", "z", "zp"}); }
Expr lx(std::string_view s) { return parse(s, {"x"}); }

QuasiLinearOde polynomial_exact() {
  QuasiLinearOde o{q("1"), q("12*x*z^3"), q("3*z^4 - 1"), {-1, 2}, Point3{0, 2, 0}};
  return o;
}

QuasiLinearOde rational_raw() {
  return QuasiLinearOde{q("x*z*(2*x+z)"), q("x*(x+z)"), q("z*(3*x+z)"), {0.5, 3}, Point3{1, 1, 0}};
}

QuasiLinearOde rational_exact() {
  return QuasiLinearOde{q("1"), q("(x+z)/(z*(2*x+z))"), q("(3*x+z)/(x*(2*x+z))"), {0.5, 3},
                        Point3{1, 1, 0}};
}

const Box kRationalBox{{0.5, 1.5}, {0.5, 1.5}, {-1, 1}};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST(Exactness, PolynomialTripleIsExact) {
  const auto ode = polynomial_exact();
  const ExactnessReport r = check_exactness(ode, default_box(ode));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.evaluated, 128u);
  for (double v : r.max_raw) EXPECT_LE(v, 1e-10);
  const Env env{{"x", 0.3}, {"z", 2}, {"zp", 0}};
  EXPECT_NEAR(differentiate(ode.a1, "x", env).d1, 96.0, 1e-12);
  EXPECT_NEAR(differentiate(ode.a0, "z", env).d1, 96.0, 1e-12);
}

TEST(Exactness, RationalTripleIsNotExact) {
  const ExactnessReport r = check_exactness(rational_raw(), kRationalBox);
  EXPECT_FALSE(r.exact);
  ASSERT_TRUE(r.witness);
  const Point3 w = *r.witness;
  // d a2/dz = 2x(x+z), d a1/dz' = 0
  EXPECT_NEAR(r.witness_residuals[0], 2 * w.x * (w.x + w.z), 1e-12);
  EXPECT_GE(std::abs(r.witness_residuals[0]), 1e-2);
}

TEST(Exactness, IntegratingFactorRestoresExactness) {
  const QuasiLinearOde m = apply_mu(q("1/(x*z*(2*x+z))"), rational_raw(), kRationalBox);
  const ExactnessReport r = check_exactness(m, kRationalBox);
  EXPECT_TRUE(r.exact);
  for (double v : r.max_scaled) EXPECT_LE(v, 1e-10);
  const QuasiLinearOde ref = rational_exact();
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.5, 1.5), d(-1, 1);
  for (int i = 0; i < 20; ++i) {
    const Env env{{"x", u(rng)}, {"z", u(rng)}, {"zp", d(rng)}};
    EXPECT_NEAR(evaluate(m.a1, env), evaluate(ref.a1, env), 1e-13);
    EXPECT_NEAR(evaluate(m.a0, env), evaluate(ref.a0, env), 1e-13);
    const double x = *env.find("x"), z = *env.find("z");
    const double mixed = -1 / ((2 * x + z) * (2 * x + z));
    EXPECT_NEAR(differentiate(ref.a1, "x", env).d1, mixed, 1e-12);
    EXPECT_NEAR(differentiate(ref.a0, "z", env).d1, mixed, 1e-12);
  }
}

TEST(Exactness, InsufficientSamples) {
  const QuasiLinearOde o{q("1"), q("ln(x)"), q("0"), {-2, 2}, std::nullopt};
  EXPECT_EQ(code_of([&] { check_exactness(o, Box{{-2, 1}, {0, 1}, {0, 1}}); }),
            ErrorCode::InsufficientSamples);
  EXPECT_EQ(code_of([&] { default_box(o); }), ErrorCode::InvalidInput);
}

TEST(Mu, IdentityAndExponential) {
  const auto ode = polynomial_exact();
  const QuasiLinearOde same = apply_mu(Expr(1.0), ode, default_box(ode));
  EXPECT_TRUE(same.a1.structurally_equal(ode.a1));

  const QuasiLinearOde lin{q("exp(x)"), q("cos(x)"), q("-(cos(x)+sin(x))"), {-1, 3}, std::nullopt};
  const Box box{{-1, 3}, {-1, 1}, {-1, 1}};
  const QuasiLinearOde m = apply_mu(q("exp(-x)"), lin, box);
  for (double x : {-0.5, 0.0, 1.7}) {
    const Env env{{"x", x}, {"z", 0.3}, {"zp", 0.1}};
    EXPECT_NEAR(evaluate(m.a2, env), 1.0, 1e-15);
    EXPECT_NEAR(evaluate(m.a1, env), std::exp(-x) * std::cos(x), 1e-15);
    EXPECT_NEAR(evaluate(m.a0, env), -std::exp(-x) * (std::cos(x) + std::sin(x)), 1e-15);
  }
  EXPECT_EQ(code_of([&] { apply_mu(q("x - x"), lin, box); }), ErrorCode::ZeroMu);
}

TEST(LinearCriterion, Cases) {
  const auto a = linear_ifactor_check(lx("exp(x)"), lx("cos(x)"), lx("-(cos(x)+sin(x))"), {-2, 3});
  EXPECT_TRUE(a.holds);
  EXPECT_EQ(a.samples, 64u);
  EXPECT_LE(a.max_scaled, 1e-10);
  EXPECT_TRUE(linear_ifactor_check(lx("1"), lx("0"), lx("0"), {0, 1}).holds);
  const auto c = linear_ifactor_check(lx("1"), lx("x"), lx("0"), {0, 1});
  EXPECT_FALSE(c.holds);
  EXPECT_NEAR(c.max_raw, 1.0, 1e-15);
}

TEST(FirstIntegral, PolynomialMatchesClosedForm) {
  const FirstIntegral fi = FirstIntegral::build(polynomial_exact(), {0, 2, 0});
  EXPECT_EQ(fi(0, 2, 0), 0.0);
  EXPECT_NEAR(fi(1, 1, 0.5), 2.5, 1e-8);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> ux(0, 1), uz(0.5, 2.5), up(-5, 5);
  for (int i = 0; i < 50; ++i) {
    const double x = ux(rng), z = uz(rng), zp = up(rng);
    EXPECT_NEAR(fi(x, z, zp), 3 * x * std::pow(z, 4) - x + zp, 1e-8);
  }
}

TEST(FirstIntegral, DerivativeInVelocityIsLeadingCoefficient) {
  const QuasiLinearOde ode{q("2 + zp^2 + 0*x*z"), q("0"), q("0"), {-1, 1}, Point3{0, 0, 0}};
  const FirstIntegral fi = FirstIntegral::build(ode, {0.2, -0.3, 0.1});
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 50; ++i) {
    const double zp = u(rng);
    EXPECT_NEAR(fi.dphi_dzp(0.2, -0.3, zp), 2 + zp * zp, 1e-8);
    const double h = 1e-5;
    EXPECT_NEAR((fi(0.2, -0.3, zp + h) - fi(0.2, -0.3, zp - h)) / (2 * h), 2 + zp * zp, 1e-6);
  }
  const FirstIntegral poly = FirstIntegral::build(polynomial_exact(), {0, 2, 0});
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(poly.dphi_dzp(0.4, 1.3, u(rng)), 1.0, 1e-8);
}

TEST(FirstIntegral, SolveVelocity) {
  const FirstIntegral fi = FirstIntegral::build(polynomial_exact(), {0, 2, 0});
  EXPECT_NEAR(fi.solve_zprime(0.1, 2, -10, 10), -4.7, 1e-9);
  EXPECT_NEAR(fi.solve_zprime(0, 2, -10, 10), 0.0, 1e-9);
  EXPECT_NEAR(fi.solve_zprime(0, 1.37, -10, 10), 0.0, 1e-9);
  EXPECT_EQ(code_of([&] { fi.solve_zprime(0.1, 2, 0, 10); }), ErrorCode::NoRootInBracket);
  const QuasiLinearOde bad{q("zp"), q("0"), q("0"), {-1, 1}, Point3{0, 0, 0}};
  const FirstIntegral b = FirstIntegral::build(bad, {0, 0, 0});
  EXPECT_EQ(code_of([&] { b.solve_zprime(0, 0, -1, 1, 0.1); }), ErrorCode::NonMonotone);
}

TEST(FirstIntegral, RationalAgainstCorrectedClosedForm) {
  const FirstIntegral fi = FirstIntegral::build(rational_exact(), {1, 1, 0});
  // zp + ln(x sqrt(z (2x + z))) is constant; at the anchor it equals ln sqrt 3
  auto closed = [](double x, double z, double zp) {
    return zp + std::log(x * std::sqrt(z * (2 * x + z)));
  };
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.6, 1.5), d(-1, 1);
  for (int i = 0; i < 20; ++i) {
    const double x = u(rng), z = u(rng), zp = d(rng);
    EXPECT_NEAR(closed(x, z, zp) - fi(x, z, zp), std::log(std::sqrt(3.0)), 1e-8);
  }
}

TEST(FirstIntegral, PrintedRationalFormIsNotConstant) {
  const FirstIntegral fi = FirstIntegral::build(rational_exact(), {1, 1, 0});
  auto printed = [](double x, double z, double zp) {
    return zp + std::log(x * z * std::sqrt(2 * x + z));
  };
  // differs from the quadrature by ln(sqrt 3) + ln(z)/2, which varies with z
  const double a = printed(1.2, 0.7, 0.1) - fi(1.2, 0.7, 0.1);
  const double b = printed(1.2, 1.4, 0.1) - fi(1.2, 1.4, 0.1);
  EXPECT_NEAR(b - a, 0.5 * std::log(2.0), 1e-8);
}

TEST(FirstIntegral, AnchorOnSingularPath) {
  try {
    FirstIntegral::build(rational_exact(), {0, 1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("move the anchor"), std::string::npos);
  }
  const FirstIntegral fi = FirstIntegral::build(rational_exact(), {1, 1, 0});
  EXPECT_EQ(code_of([&] { fi(-0.5, 1, 0); }), ErrorCode::DomainError);
}

TEST(Conservation, PolynomialTrajectory) {
  const auto ode = polynomial_exact();
  const FirstIntegral fi = FirstIntegral::build(ode, {0, 2, 0});
  const Trajectory tr =
      integrate_ivp(ode.rhs(), 0, 2, 0, 0.5, IntegratorOptions{});
  const DriftReport d = conservation_check(fi, tr);
  EXPECT_LE(d.max_drift, 1e-6);
  EXPECT_GT(d.samples, 10u);
}

TEST(Conservation, DriftScalesWithTolerance) {
  const auto ode = polynomial_exact();
  const Invariant phi = [](double x, double z, double zp) { return 3 * x * std::pow(z, 4) - x + zp; };
  std::vector<double> drift;
  for (double tol : {1e-6, 1e-7, 1e-8, 1e-9}) {
    IntegratorOptions o;
    o.rtol = o.atol = tol;
    drift.push_back(conservation_check(phi, 0.0, integrate_ivp(ode.rhs(), 0, 2, 0, 0.5, o)).max_drift);
  }
  // drift / tol stays within one factor of 10 across the ladder
  double lo = INFINITY, hi = 0;
  for (std::size_t i = 0; i < drift.size(); ++i) {
    const double per_tol = drift[i] / std::pow(10.0, -6.0 - static_cast<double>(i));
    lo = std::min(lo, per_tol);
    hi = std::max(hi, per_tol);
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 10.0);
}

TEST(Conservation, ConstantTrajectory) {
  const QuasiLinearOde ode{q("1"), q("0"), q("0"), {0, 2}, Point3{1, 0, 0}};
  const FirstIntegral fi = FirstIntegral::build(ode, {1, 0, 0});
  const Trajectory tr = integrate_ivp(ode.rhs(), 1, 0, 0, 2, IntegratorOptions{});
  EXPECT_EQ(conservation_check(fi, tr).max_drift, 0.0);
}

TEST(Conservation, IntegratingFactorPreservesTrajectories) {
  const QuasiLinearOde raw = rational_raw();
  const QuasiLinearOde m = apply_mu(q("1/(x*z*(2*x+z))"), raw, kRationalBox);
  IntegratorOptions o;
  o.rtol = o.atol = 1e-11;
  const Trajectory a = integrate_ivp(raw.rhs(), 1, 1, 0, 1.5, o);
  const Trajectory b = integrate_ivp(m.rhs(), 1, 1, 0, 1.5, o);
  for (int i = 0; i <= 50; ++i) {
    const double x = 1 + 0.5 * i / 50;
    EXPECT_NEAR(a.at(x).value, b.at(x).value, 1e-7);
    EXPECT_NEAR(a.at(x).d1, b.at(x).d1, 1e-7);
  }
  const FirstIntegral fi = FirstIntegral::build(m, {1, 1, 0});
  EXPECT_LE(conservation_check(fi, integrate_ivp(m.rhs(), 1, 1, 0, 1.2, IntegratorOptions{})).max_drift,
            1e-6);
}

TEST(Conservation, ReducedFirstOrderEquation) {
  const auto ode = polynomial_exact();
  const FirstIntegral fi = FirstIntegral::build(ode, {0, 2, 0});
  const Trajectory reduced = integrate_first_order(fi, 0, 2, 0, 0.5, 1e-10);
  const Trajectory full = integrate_ivp(ode.rhs(), 0, 2, 0, 0.5, IntegratorOptions{});
  for (double x : {0.1, 0.3, 0.5}) EXPECT_NEAR(reduced.at(x).value, full.at(x).value, 1e-7);
}
