#include "clipfl/algorithms.hpp"
#include "clipfl/fourth_order.hpp"

#include <benchmark/benchmark.h>

using namespace clipfl;

namespace {

FourthOrderProblem fig_problem() {
  FourthOrderOptions o;
  o.dim = 100;
  o.clients = 10;
  o.components = 100;
  o.sort_by_norm = true;
  o.seed = 3;
  return FourthOrderProblem::sample(o);
}

RunOptions one_epoch() {
  RunOptions o;
  o.epochs = 1;
  o.divergence_threshold = 1e300;
  return o;
}

void BM_ClerrEpoch(benchmark::State& state) {
  const auto p = fig_problem();
  ClerrParams params;
  params.inner_stepsize = StepSchedule::constant(1e-7);
  params.policy = ClipPolicy(1e4, 1e-2, StepsizeMode::kPseudogradient);
  const ParamVector x0 = ParamVector::Ones(100);
  for (auto _ : state) benchmark::DoNotOptimize(run_clerr(p, params, x0, one_epoch()));
}
BENCHMARK(BM_ClerrEpoch)->Unit(benchmark::kMillisecond);

void BM_ClipLocalGdjEpoch(benchmark::State& state) {
  const auto p = fig_problem();
  ClipLocalGdjParams params;
  params.schedule = LocalSchedule::uniform(static_cast<std::size_t>(state.range(0)));
  params.inner_stepsize = StepSchedule::constant(1e-7);
  params.policy = ClipPolicy(1e4, 1e-2, StepsizeMode::kPseudogradient);
  const ParamVector x0 = ParamVector::Ones(100);
  for (auto _ : state) benchmark::DoNotOptimize(run_clip_local_gdj(p, params, x0, one_epoch()));
}
BENCHMARK(BM_ClipLocalGdjEpoch)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ClippedRrCliEpoch(benchmark::State& state) {
  const auto p = fig_problem();
  ClippedRrCliParams params;
  params.client_stepsize = StepSchedule::constant(1e-10);
  params.server_stepsize = StepSchedule::constant(1e-10);
  params.policy = ClipPolicy(1e6, 1e-10, StepsizeMode::kPseudogradient);
  params.cohort_size = 2;
  params.batch_size = 16;
  const ParamVector x0 = ParamVector::Ones(100);
  for (auto _ : state) benchmark::DoNotOptimize(run_clipped_rr_cli(p, params, x0, one_epoch()));
}
BENCHMARK(BM_ClippedRrCliEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
