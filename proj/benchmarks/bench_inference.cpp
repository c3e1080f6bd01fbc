#include <benchmark/benchmark.h>

#include <random>

#include "archmrf/arch_template.hpp"
#include "archmrf/clique_tree.hpp"
#include "archmrf/diverse.hpp"
#include "archmrf/elimination.hpp"
#include "archmrf/mplp.hpp"
#include "archmrf/resource_model.hpp"

namespace {

using namespace archmrf;

// random factors on a unet skeleton of the given depth
FactorGraph random_unet_graph(int depth, std::uint64_t seed) {
  FactorGraph skeleton = to_factor_graph_skeleton(build_unet_template(depth));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> unary = skeleton.unaries();
  for (auto& u : unary) {
    for (double& x : u) x = gauss(rng);
  }
  std::vector<PairTable> pairwise = skeleton.pairwise_tables();
  for (PairTable& t : pairwise) {
    for (double& x : t.values) x = 0.3 * gauss(rng);
  }
  return FactorGraph(skeleton.label_sets(), std::move(unary), skeleton.edges(),
                     std::move(pairwise));
}

void BM_MapCliqueTree(benchmark::State& state) {
  FactorGraph g = random_unet_graph(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(map_clique_tree(g).score);
  }
}
BENCHMARK(BM_MapCliqueTree)->Arg(2)->Arg(3)->Arg(4)->Arg(5);

void BM_MapMplp(benchmark::State& state) {
  FactorGraph g = random_unet_graph(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(map_mplp(g).primal);
  }
}
BENCHMARK(BM_MapMplp)->Arg(2)->Arg(3)->Arg(4)->Arg(5);

void BM_MinFill(benchmark::State& state) {
  FactorGraph g = to_factor_graph_skeleton(
      build_unet_plusplus_template(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(triangulate_minfill(g).fill_edges.size());
  }
}
BENCHMARK(BM_MinFill)->Arg(3)->Arg(5)->Arg(7);

void BM_DiverseFive(benchmark::State& state) {
  FactorGraph g = random_unet_graph(3, 2);
  DiverseConfig cfg;
  cfg.solver = state.range(0) == 0 ? MapSolver::Exact : MapSolver::Mplp;
  for (auto _ : state) {
    benchmark::DoNotOptimize(diverse_mbest(g, cfg).solutions.size());
  }
}
BENCHMARK(BM_DiverseFive)->Arg(0)->Arg(1);

void BM_FlopsModel(benchmark::State& state) {
  Template t = build_unet_template(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(flops_pairwise(t).graph.num_edges());
  }
}
BENCHMARK(BM_FlopsModel)->Arg(2)->Arg(5);

}  // namespace
