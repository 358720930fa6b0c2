#include <benchmark/benchmark.h>

#include "clustermax/cluster_process.hpp"
#include "clustermax/hawkes.hpp"
#include "clustermax/random_maxima.hpp"
#include "clustermax/random_stream.hpp"

namespace {

using namespace clustermax;

void BM_PhiloxDraw(benchmark::State& state) {
  RandomStream rng(1, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng());
}
BENCHMARK(BM_PhiloxDraw);

void BM_GeometricStoppingMaximum(benchmark::State& state) {
  const MarkModel x(MarkFamily::pareto(2.0));
  const ClusterSizePolicy policy = GeometricStopping{MarkModel(MarkFamily::pareto(2.0))};
  RandomStream rng(2, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_h(policy, x, rng).h);
}
BENCHMARK(BM_GeometricStoppingMaximum);

void BM_HawkesCluster(benchmark::State& state) {
  const double kappa = static_cast<double>(state.range(0)) / 10.0;
  const auto fert = FertilityModel::exponential(kappa, 1.0);
  const MarkModel marks(MarkFamily::pareto(2.0));
  RandomStream rng(3, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_hawkes_cluster(fert, marks, 1.0, rng).total_size());
}
BENCHMARK(BM_HawkesCluster)->Arg(2)->Arg(5)->Arg(8);

void BM_ProcessStreaming(benchmark::State& state) {
  const double t = static_cast<double>(state.range(0));
  const MarkModel marks(MarkFamily::pareto(2.0));
  const OffspringMechanism mech(OffspringLayout::MixedBinomial, IndependentSize{CountLaw::poisson(1.0)},
                                OffsetLaw::unconditional(PositiveLaw::exponential(1.0)));
  const auto parent = ParentProcess::poisson(1.0);
  RandomStream rng(4, 0, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_process(parent, mech, marks, t, rng, RetainPoints::None).m_tau);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProcessStreaming)->RangeMultiplier(10)->Range(100, 10000)->Complexity();

void BM_HawkesThinning(benchmark::State& state) {
  const auto fert = FertilityModel::exponential(0.5, 1.0);
  const MarkModel marks(MarkFamily::exponential(1.0));
  RandomStream rng(5, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_hawkes_by_thinning(fert, marks, 1.0, 500.0, rng).size());
}
BENCHMARK(BM_HawkesThinning);

}  // namespace

BENCHMARK_MAIN();
