#include <benchmark/benchmark.h>

#include "lsqtl/asymptotics.hpp"
#include "lsqtl/lrt.hpp"
#include "lsqtl/nonparam.hpp"
#include "lsqtl/simharness.hpp"

using namespace lsqtl;

namespace {

PhenotypeGroups dataset(int n, const Kernel& k) {
  SimScenario s;
  s.n = n;
  s.f1 = {k, {0.0, 1.0}};
  s.f2 = {k, {0.5, 1.25}};
  StreamRng rng(42, 0);
  return gen_data(s, rng);
}

void BM_SampleR(benchmark::State& state) {
  for (auto _ : state) {
    auto t = sample_R(0.0475813, static_cast<std::size_t>(state.range(0)), 1, 1);
    benchmark::DoNotOptimize(t.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleR)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_OracleSupProcess(benchmark::State& state) {
  for (auto _ : state) {
    auto t = oracle_sup_process(0.0475813, StatKind::full, 201, 10000, 1, 1);
    benchmark::DoNotOptimize(t.samples.data());
  }
}
BENCHMARK(BM_OracleSupProcess)->Unit(benchmark::kMillisecond);

void BM_LrtStatistics(benchmark::State& state) {
  const Kernel k = state.range(1) == 0 ? kNormal : kLogistic;
  const auto g = dataset(static_cast<int>(state.range(0)), k);
  const FitConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(lrt_statistics(g, k, cfg).full);
}
BENCHMARK(BM_LrtStatistics)
    ->Args({200, 0})
    ->Args({300, 0})
    ->Args({200, 1})
    ->Unit(benchmark::kMillisecond);

void BM_FitNull(benchmark::State& state) {
  const Kernel k = state.range(0) == 0 ? kNormal : kLogistic;
  const auto g = dataset(300, k);
  for (auto _ : state) benchmark::DoNotOptimize(fit_null(g, k).loglik);
}
BENCHMARK(BM_FitNull)->Arg(0)->Arg(1);

void BM_KSample(benchmark::State& state) {
  const auto g = dataset(static_cast<int>(state.range(0)), kNormal);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ks_ksample(g));
    benchmark::DoNotOptimize(ad_ksample(g));
  }
}
BENCHMARK(BM_KSample)->Arg(200)->Arg(2000);

void BM_DaviesPValue(benchmark::State& state) {
  double u = 5.0;
  for (auto _ : state) benchmark::DoNotOptimize(davies_pvalue(u, 0.0475813, StatKind::full));
}
BENCHMARK(BM_DaviesPValue);

}  // namespace
BENCHMARK_MAIN();
