#include <benchmark/benchmark.h>

#include "edci/inverse_newton.hpp"
#include "edci/synth_bench.hpp"
#include "edci/vb_surrogate.hpp"

using namespace edci;

namespace {

TimeSeries prices(Index days) {
  bench::ExogenousSpec es;
  es.days = days;
  es.price_shape = bench::PriceShape::SingleCycle;
  return bench::synthesize_exogenous(es).price;
}

const VbTheta kTheta({{1.3, 2.71, -1.9}, {0.7, 1.13, -0.37}, {2.0, 6.0, 0.0}});

}  // namespace

// One battery's LP over the whole horizon, assembled in dense form.
static void BM_SolveLp(benchmark::State& state) {
  const auto p = prices(state.range(0));
  const auto lp = vb::assemble_lp(VbTheta({kTheta.battery(0)}), p).lp;
  for (auto _ : state) benchmark::DoNotOptimize(lp::solve_lp(lp));
  state.SetLabel("T=" + std::to_string(p.size()));
}
BENCHMARK(BM_SolveLp)->Arg(1)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_VbResponse(benchmark::State& state) {
  const auto p = prices(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(vb::vb_response(kTheta, p));
}
BENCHMARK(BM_VbResponse)->Arg(1)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

static void BM_NewtonStep(benchmark::State& state) {
  const auto p = prices(state.range(0));
  const auto target = vb::vb_response(VbTheta::from_flat(kTheta.flat() * 1.1), p).esl_total;
  for (auto _ : state) benchmark::DoNotOptimize(inverse::newton_step(kTheta, target, p, lp::Tolerances{}));
}
BENCHMARK(BM_NewtonStep)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
