#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>

#include "secord/error.hpp"
#include "secord/expr.hpp"

using namespace secord;

namespace {

Expr px(std::string_view s) { return parse(s, {"x"}); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidInput;
}

// Random smooth expression over x and y; every function argument is wrapped
// so that evaluation stays inside its domain.
class RandomExpr {
 public:
  explicit RandomExpr(unsigned seed) : rng_(seed) {}

  Expr operator()(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 12);
    const int k = pick(rng_);
    switch (k) {
      case 0: return Expr::variable("x");
      case 1: return Expr::variable("y");
      case 2: return Expr::constant(std::uniform_real_distribution<double>(-2, 2)(rng_));
      case 3: return (*this)(depth - 1) + (*this)(depth - 1);
      case 4: return (*this)(depth - 1) - (*this)(depth - 1);
      case 5: return (*this)(depth - 1) * (*this)(depth - 1);
      case 6: {
        const Expr d = (*this)(depth - 1);
        return (*this)(depth - 1) / (1.0 + d * d);
      }
      case 7: return -(*this)(depth - 1);
      case 8: {
        const Expr b = (*this)(depth - 1);
        return std::uniform_int_distribution<int>(0, 1)(rng_) ? pow(b, 3.0)
                                                               : pow(1.0 + b * b, 0.5);
      }
      default: return wrapped_function(depth - 1);
    }
  }

 private:
  Expr wrapped_function(int depth) {
    const Expr u = (*this)(depth);
    const Expr s = call(Fn::Sin, u);
    switch (std::uniform_int_distribution<int>(0, 11)(rng_)) {
      case 0: return s;
      case 1: return call(Fn::Cos, u);
      case 2: return call(Fn::Tan, 0.5 * s);
      case 3: return call(Fn::Exp, s);
      case 4: return call(Fn::Ln, 1.0 + u * u);
      case 5: return call(Fn::Sqrt, 1.0 + u * u);
      case 6: return call(Fn::Asin, 0.5 * s);
      case 7: return call(Fn::Acos, 0.5 * s);
      case 8: return call(Fn::Atan, u);
      case 9: return call(Fn::Sinh, s);
      case 10: return call(Fn::Cosh, s);
      default: return call(Fn::Abs, 2.0 + s);
    }
  }

  std::mt19937 rng_;
};

}  // namespace

TEST(Parse, ConstantLiteral) {
  const Expr e = px("0");
  ASSERT_EQ(e.op(), Op::Constant);
  EXPECT_EQ(e.constant_value(), 0.0);
}

TEST(Parse, DifferenceOfPower) {
  const Expr e = px("1 - x^2");
  ASSERT_EQ(e.op(), Op::Sub);
  EXPECT_TRUE(e.children()[0].structurally_equal(Expr::constant(1)));
  const Expr& p = e.children()[1];
  ASSERT_EQ(p.op(), Op::Pow);
  EXPECT_EQ(p.children()[0].name(), "x");
  EXPECT_EQ(p.children()[1].constant_value(), 2.0);
}

TEST(Parse, ProductInThreeVariables) {
  const Expr e = parse("12*x*z^3", {"x", "z", "zp"});
  ASSERT_EQ(e.op(), Op::Mul);
  EXPECT_EQ(e.variables(), (std::vector<std::string>{"x", "z"}));
  EXPECT_DOUBLE_EQ(evaluate(e, Env{{"x", 1}, {"z", 2}, {"zp", 0}}), 96.0);
}

TEST(Parse, PrecedenceAndAssociativity) {
  const Env env{{"x", 2.0}};
  EXPECT_DOUBLE_EQ(evaluate(px("-x^2"), env), -4.0);
  EXPECT_DOUBLE_EQ(evaluate(px("2^3^2"), env), 512.0);
  EXPECT_DOUBLE_EQ(evaluate(px("2^-1"), env), 0.5);
  EXPECT_DOUBLE_EQ(evaluate(px("8/2/2"), env), 2.0);
  EXPECT_DOUBLE_EQ(evaluate(px("1-2-3"), env), -4.0);
  EXPECT_DOUBLE_EQ(evaluate(px("2*x^2*3"), env), 24.0);
  EXPECT_DOUBLE_EQ(evaluate(px("- - x"), env), 2.0);
  EXPECT_DOUBLE_EQ(evaluate(px("1.5e1 + .5"), env), 15.5);
}

TEST(Parse, Errors) {
  EXPECT_EQ(code_of([] { px("1 +"); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { px("(x"); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { px("x y"); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { px("y + 1"); }), ErrorCode::UnknownIdentifier);
  EXPECT_EQ(code_of([] { px("foo(x)"); }), ErrorCode::UnknownIdentifier);
  EXPECT_EQ(code_of([] { px("sin x"); }), ErrorCode::SyntaxError);
}

TEST(Parse, SyntaxErrorReportsPosition) {
  try {
    px("1 + * 2");
    FAIL();
  } catch (const Error& e) {
    ASSERT_EQ(e.point().size(), 1u);
    EXPECT_EQ(e.point()[0], 4.0);
  }
}

TEST(Print, RoundTripIsStructural) {
  for (const char* s : {"1 - x^2", "-x^2", "(-x)^2", "2^3^2", "(2^3)^2", "x/(1+x)/2",
                        "asin(2*x-1)", "sqrt(1-x^2)*-x", "exp(-(x-1)^2/2)", "1/(2*(asin(x)+1))",
                        "abs(x) - cosh(x) + sinh(x)^2", "x - (1 - x)", "-(x*x)"}) {
    const Expr a = px(s);
    const Expr b = px(a.to_string());
    EXPECT_TRUE(a.structurally_equal(b)) << s << " printed as " << a.to_string();
    EXPECT_EQ(a.to_string(), b.to_string());
  }
}

TEST(Print, RandomRoundTrip) {
  RandomExpr gen(123);
  for (int i = 0; i < 300; ++i) {
    const Expr a = gen(4);
    const Expr b = parse(a.to_string(), {"x", "y"});
    ASSERT_TRUE(a.structurally_equal(b)) << a.to_string();
  }
}

TEST(Evaluate, Examples) {
  EXPECT_NEAR(evaluate(px("1-x^2"), Env{{"x", 0.6}}), 0.64, 1e-15);
  EXPECT_NEAR(evaluate(px("asin(x)"), Env{{"x", 0.5}}), std::numbers::pi / 6, 1e-15);
  EXPECT_EQ(evaluate(px("ln(x)"), Env{{"x", 1}}), 0.0);
}

TEST(Evaluate, DomainErrors) {
  EXPECT_EQ(code_of([] { evaluate(px("ln(x)"), Env{{"x", 0}}); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { evaluate(px("sqrt(x)"), Env{{"x", -1}}); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { evaluate(px("asin(x)"), Env{{"x", 1.5}}); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { evaluate(px("1/x"), Env{{"x", 0}}); }), ErrorCode::DivisionByZero);
  EXPECT_EQ(code_of([] { evaluate(px("x^0.5"), Env{{"x", -2}}); }), ErrorCode::DomainError);
  EXPECT_DOUBLE_EQ(evaluate(px("x^3"), Env{{"x", -2}}), -8.0);
}

TEST(Evaluate, Deterministic) {
  RandomExpr gen(5);
  for (int i = 0; i < 100; ++i) {
    const Expr e = gen(4);
    const Env env{{"x", 0.3}, {"y", -0.7}};
    const double a = evaluate(e, env), b = evaluate(e, env);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
}

TEST(Differentiate, Examples) {
  EXPECT_DOUBLE_EQ(differentiate(px("1-x^2"), "x", Env{{"x", 0.5}}).d1, -1.0);
  EXPECT_DOUBLE_EQ(differentiate(parse("exp(y)", {"y"}), "y", Env{{"y", 0}}).d2, 1.0);
  const Dual2 d = differentiate(parse("12*x*z^3", {"x", "z", "zp"}), "x",
                                Env{{"x", 1}, {"z", 2}, {"zp", 0}});
  EXPECT_DOUBLE_EQ(d.d1, 96.0);
  EXPECT_DOUBLE_EQ(d.d2, 0.0);
}

TEST(Differentiate, PartialsHoldOthersFixed) {
  const Expr e = parse("x*z^2 + sin(zp)*x", {"x", "z", "zp"});
  const Env env{{"x", 2}, {"z", 3}, {"zp", 0.5}};
  EXPECT_NEAR(differentiate(e, "z", env).d1, 12.0, 1e-14);
  EXPECT_NEAR(differentiate(e, "z", env).d2, 4.0, 1e-14);
  EXPECT_NEAR(differentiate(e, "zp", env).d1, 2.0 * std::cos(0.5), 1e-14);
  EXPECT_NEAR(differentiate(e, "x", env).d1, 9.0 + std::sin(0.5), 1e-14);
}

TEST(Differentiate, SqrtAtZeroWithConstantSeed) {
  const Dual2 d = differentiate(parse("sqrt(y) + x", {"x", "y"}), "x", Env{{"x", 1}, {"y", 0}});
  EXPECT_EQ(d.value, 1.0);
  EXPECT_EQ(d.d1, 1.0);
  EXPECT_EQ(d.d2, 0.0);
}

TEST(Dual2, RulesAgainstFiniteDifferences) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  auto f = [](const Dual2& x) {
    const Dual2 a = x * x;
    const Dual2 b = Dual2::constant(1.0) / (x + Dual2::constant(1.0));
    return a * b - chain(x, std::sin(x.value), std::cos(x.value), -std::sin(x.value));
  };
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), h = 1e-4;
    const Dual2 d = f(Dual2::seed(x));
    const double fd1 = (f(Dual2::constant(x + h)).value - f(Dual2::constant(x - h)).value) / (2 * h);
    const double fd2 = (f(Dual2::seed(x + h)).d1 - f(Dual2::seed(x - h)).d1) / (2 * h);
    EXPECT_NEAR(d.d1, fd1, 1e-6 * (1 + std::abs(d.d1)));
    EXPECT_NEAR(d.d2, fd2, 1e-6 * (1 + std::abs(d.d2)));
  }
}

TEST(Property, AutomaticVersusCentralDifference) {
  RandomExpr gen(20240611);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr double h = 1e-5;
  int checked = 0, worst_index = -1;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Expr e = gen(4);
    const double x = u(rng), y = u(rng);
    const std::string wrt = (i % 2) ? "x" : "y";
    Env env{{"x", x}, {"y", y}};
    const Dual2 ad = differentiate(e, wrt, env);
    Env lo = env, hi = env;
    lo.set(wrt, *env.find(wrt) - h);
    hi.set(wrt, *env.find(wrt) + h);
    const double fd = (evaluate(e, hi) - evaluate(e, lo)) / (2 * h);
    const double err = std::abs(ad.d1 - fd) / (1 + std::abs(ad.d1));
    if (err > worst) {
      worst = err;
      worst_index = i;
    }
    ++checked;
    // second derivative against a difference of first derivatives
    const double fd2 = (differentiate(e, wrt, hi).d1 - differentiate(e, wrt, lo).d1) / (2 * h);
    EXPECT_LE(std::abs(ad.d2 - fd2), 1e-4 * (1 + std::abs(ad.d2))) << e.to_string();
  }
  EXPECT_EQ(checked, 1000);
  EXPECT_LE(worst, 1e-5) << "worst case index " << worst_index;
}
