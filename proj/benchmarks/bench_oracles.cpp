#include "clipfl/fourth_order.hpp"
#include "clipfl/logistic.hpp"

#include <benchmark/benchmark.h>

using namespace clipfl;

namespace {

FourthOrderProblem make_fourth(std::size_t d) {
  FourthOrderOptions o;
  o.dim = d;
  o.clients = 10;
  o.components = 100;
  o.seed = 1;
  return FourthOrderProblem::sample(o);
}

void BM_FourthOrderComponentGradient(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto p = make_fourth(d);
  const ParamVector x = ParamVector::Ones(static_cast<Eigen::Index>(d));
  ParamVector out(x.size());
  std::size_t j = 0;
  for (auto _ : state) {
    p.component_gradient(j % 10, j % 100, x, out);
    benchmark::DoNotOptimize(out.data());
    ++j;
  }
}
BENCHMARK(BM_FourthOrderComponentGradient)->Arg(1)->Arg(100);

void BM_FourthOrderFullGradient(benchmark::State& state) {
  const auto p = make_fourth(100);
  const ParamVector x = ParamVector::Ones(100);
  ParamVector out(100), client(100), scratch(100);
  for (auto _ : state) {
    grad_full_into(p, x, out, client, scratch);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FourthOrderFullGradient);

void BM_LogisticComponentGradient(benchmark::State& state) {
  SyntheticDatasetOptions o;
  o.samples = 2000;
  o.dim = 500;
  o.density = 0.1;
  o.seed = 2;
  const LogisticProblem p(synthetic_dataset(o), 1, 0.0);
  const ParamVector x = ParamVector::Constant(500, 0.01);
  ParamVector out(500);
  std::size_t j = 0;
  for (auto _ : state) {
    p.component_gradient(0, j % 2000, x, out);
    benchmark::DoNotOptimize(out.data());
    ++j;
  }
}
BENCHMARK(BM_LogisticComponentGradient);

}  // namespace
