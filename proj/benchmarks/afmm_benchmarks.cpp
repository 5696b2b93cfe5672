#include <benchmark/benchmark.h>

#include "afmm/cost_model.hpp"
#include "afmm/engine.hpp"
#include "afmm/interaction_lists.hpp"
#include "afmm/pointgen.hpp"
#include "afmm/tree.hpp"

namespace {

using namespace afmm;

PointSet points_for(int kind, std::size_t n) {
  switch (kind) {
    case 0:
      return generate_standard(DistributionKind::uniform, n, 1);
    case 1:
      return generate_standard(DistributionKind::spiral, n, 1);
    default:
      return sample_cantor(FractalSpec{DistributionKind::cantor, gamma_for_dimension(2.0, 3), 14, 3, 1,
                                       Placement::random_in_leaf},
                           n);
  }
}

void BM_BuildTree(benchmark::State& state) {
  const PointSet p = points_for(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(build_tree(p, TreeConfig{8, kUnboundedDepth, 3}));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_BuildTree)->ArgsProduct({{0, 1, 2}, {10000, 100000}})->Unit(benchmark::kMillisecond);

void BM_InteractionLists(benchmark::State& state) {
  const PointSet p = points_for(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const Tree t = build_tree(p, TreeConfig{8, kUnboundedDepth, 3});
  for (auto _ : state) benchmark::DoNotOptimize(build_interaction_lists(t));
}
BENCHMARK(BM_InteractionLists)->ArgsProduct({{0, 1, 2}, {10000, 100000}})->Unit(benchmark::kMillisecond);

void BM_CountOperations(benchmark::State& state) {
  const PointSet p = points_for(static_cast<int>(state.range(0)), 100000);
  const Tree t = build_tree(p, TreeConfig{1, static_cast<int>(state.range(1)), 3});
  for (auto _ : state) benchmark::DoNotOptimize(count_operations(t));
}
BENCHMARK(BM_CountOperations)->ArgsProduct({{0, 1, 2}, {4, 6}})->Unit(benchmark::kMillisecond);

void BM_RunFmm(benchmark::State& state) {
  const PointSet p = points_for(static_cast<int>(state.range(0)), 20000);
  const LaplaceKernel k;
  FmmOptions o;
  o.order = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_fmm(p, TreeConfig{32, kUnboundedDepth, 3}, k, o));
}
BENCHMARK(BM_RunFmm)->ArgsProduct({{0, 1}, {3, 4}})->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_DirectSum(benchmark::State& state) {
  const PointSet p = points_for(0, static_cast<std::size_t>(state.range(0)));
  const LaplaceKernel k;
  for (auto _ : state) benchmark::DoNotOptimize(direct_sum(p, k));
}
BENCHMARK(BM_DirectSum)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
