#include <benchmark/benchmark.h>

#include "eistwist/eisenstein.hpp"
#include "eistwist/specfun.hpp"

using namespace eistwist;

static void BM_BesselK(benchmark::State& state) {
  const Complex nu(2.0, static_cast<double>(state.range(0)));
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel_k(nu, x));
    x = x < 20.0 ? x * 1.07 : 0.1;
  }
}
BENCHMARK(BM_BesselK)->Arg(0)->Arg(5)->Arg(30);

static void BM_CosetEnumeration(benchmark::State& state) {
  const auto model = builtin_group("modular");
  const double radius = static_cast<double>(state.range(0));
  const Point z = make_point(0.28, 0.9);
  for (auto _ : state) {
    std::size_t n = 0;
    for_each_coset(model, 0, radius, z, 0, coset_c_bound(model, 0, radius, z), [&](const CosetVisit&) { ++n; });
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_CosetEnumeration)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_DirectEval(benchmark::State& state) {
  const auto model = builtin_group("modular");
  const Twist chi = sym_power_twist(model, static_cast<int>(state.range(0)));
  EvalConfig cfg;
  cfg.radius = 200.0;
  cfg.c1_hat = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(direct_eval(model, chi, 0, make_point(0.28, 0.9), 4.0, cfg).matrix);
  }
}
BENCHMARK(BM_DirectEval)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_FourierEval(benchmark::State& state) {
  const auto model = builtin_group("modular");
  const Twist chi = sym_power_twist(model, static_cast<int>(state.range(0)));
  EvalConfig cfg;
  cfg.c_max = 200.0;
  cfg.c1_hat = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fourier_eval(model, chi, 0, 0, make_point(0.28, 0.9), 4.0, cfg).total.matrix);
  }
}
BENCHMARK(BM_FourierEval)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
