#include <benchmark/benchmark.h>

#include <cmath>

#include "secord/closed_form.hpp"
#include "secord/equation.hpp"
#include "secord/verify.hpp"

using namespace secord;

static void BM_Parse(benchmark::State& state) {
  for (auto _ : state) {
    Expr e = parse("(1-x^2)*ypp - x*yp + 9*y + sin(asin(x))*exp(-x/2)", {"x", "y", "yp", "ypp"});
    benchmark::DoNotOptimize(e);
  }
}
BENCHMARK(BM_Parse);

static void BM_EvaluateJet(benchmark::State& state) {
  const Expr e = parse("cos(3*asin(x))/sqrt(1-x^2) + x^4*exp(x)", {"x"});
  double x = -0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(differentiate(e, "x", Env{{"x", x}}));
    x = x > 0.7 ? -0.7 : x + 1e-3;
  }
}
BENCHMARK(BM_EvaluateJet);

static void BM_TransformMapBuild(benchmark::State& state) {
  const Expr w = parse("1-x^2", {"x"});
  for (auto _ : state) {
    TransformMap m = TransformMap::build(w, WeightMode::SqrtP, {-1.0, 1.0}, 0.0, 1e-10);
    benchmark::DoNotOptimize(m.t_range());
  }
}
BENCHMARK(BM_TransformMapBuild)->Unit(benchmark::kMillisecond);

static void BM_Integrate(benchmark::State& state) {
  IntegratorOptions opt;
  opt.rtol = opt.atol = std::pow(10.0, -static_cast<double>(state.range(0)));
  const SecondOrderRhs rhs = [](double x, double y, double yp) { return -y - 0.1 * yp + std::sin(x); };
  for (auto _ : state) {
    Trajectory tr = integrate_ivp(rhs, 0.0, 1.0, 0.0, 20.0, opt);
    benchmark::DoNotOptimize(tr.steps());
  }
}
BENCHMARK(BM_Integrate)->DenseRange(6, 12, 3)->Unit(benchmark::kMicrosecond);

static void BM_ResidualCheck(benchmark::State& state) {
  const SecondOrderEquation eq = SecondOrderEquation::from_expr(parse("(1-x^2)*ypp - x*yp + 9*y", {"x", "y", "yp", "ypp"}));
  const ClosedForm y = ClosedForm::from_expr(parse("cos(3*asin(x))", {"x"}), "x", {-1.0, 1.0});
  ResidualOptions ro;
  ro.grid = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    VerificationReport r = residual_check(y, eq, {-0.99, 0.99}, ro);
    benchmark::DoNotOptimize(r.max_scaled);
  }
}
BENCHMARK(BM_ResidualCheck)->Arg(257)->Arg(2049);
BENCHMARK_MAIN();
