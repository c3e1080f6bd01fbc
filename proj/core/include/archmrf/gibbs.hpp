#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "archmrf/factor_graph.hpp"

namespace archmrf {

/// Single-owner mutable sampler state over an immutable graph snapshot.
/// The bound graph may be swapped between sweeps (rebind) while the walk
/// state persists, which is what the long-short burn-in scheme exploits.
struct GibbsChain {
  const FactorGraph* graph = nullptr;
  Assignment state;
  std::mt19937_64 rng;
  std::uint64_t steps_taken = 0;  // single-variable resampling steps; one sweep adds n

  /// Uniform-random initial state drawn from the seed.
  GibbsChain(const FactorGraph& g, std::uint64_t seed);

  /// Swap in updated factors, keeping the walk state. Structure must match.
  void rebind(const FactorGraph& g);
};

/// P(x_var = a | rest) from the Markov blanket only:
/// proportional to exp(unary(var, a) + sum over incident edges of the
/// pairwise entry against the neighbor's current label). Normalized.
std::vector<double> gibbs_conditional(const FactorGraph& g, const Assignment& state, int var);

/// Resamples every variable once, in fixed index order.
void gibbs_sweep(GibbsChain& chain);

enum class LsbsPhase { EpochStart, Iteration };

/// Long-short burn-in scheme: a long burn-in at the start of each epoch, a
/// short one per iteration, leaning on the factors changing only slightly
/// between updates. tau is the relaxation temperature knob kept for
/// configuration parity; the sample-based gradient estimator does not use it.
struct LsbsConfig {
  int n_long = 10000;
  int n_short = 10;
  int n_mc = 1;
  double tau = 1.0;
};

/// Runs the phase's burn-in sweeps, then yields n_mc states: the first is the
/// post-burn-in state, each further one costs one extra sweep. With the
/// default n_mc = 1 an iteration consumes exactly n_short sweeps.
std::vector<Assignment> lsbs_draw(GibbsChain& chain, const LsbsConfig& config, LsbsPhase phase);

}  // namespace archmrf
