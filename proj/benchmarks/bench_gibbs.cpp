#include <benchmark/benchmark.h>

#include <random>

#include "archmrf/arch_template.hpp"
#include "archmrf/gibbs.hpp"
#include "archmrf/learning.hpp"

namespace {

using namespace archmrf;

void BM_GibbsSweep(benchmark::State& state) {
  FactorGraph g = to_factor_graph_skeleton(build_unet_template(static_cast<int>(state.range(0))));
  GibbsChain chain(g, 7);
  for (auto _ : state) {
    gibbs_sweep(chain);
    benchmark::DoNotOptimize(chain.state[0]);
  }
  state.SetItemsProcessed(state.iterations() * g.num_vars());
}
BENCHMARK(BM_GibbsSweep)->Arg(2)->Arg(5)->Arg(7);

void BM_GradEstimate(benchmark::State& state) {
  FactorGraph g = to_factor_graph_skeleton(build_unet_template(2));
  PairwiseOracle oracle = make_pairwise_oracle(g, 11, 0.3);
  GibbsChain chain(g, 3);
  std::vector<Assignment> samples;
  std::vector<double> losses;
  for (int s = 0; s < static_cast<int>(state.range(0)); ++s) {
    gibbs_sweep(chain);
    samples.push_back(chain.state);
    losses.push_back(oracle.oracle.loss(chain.state));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_expected_loss(g, samples, losses).unary.size());
  }
}
BENCHMARK(BM_GradEstimate)->Arg(64)->Arg(256);

}  // namespace
