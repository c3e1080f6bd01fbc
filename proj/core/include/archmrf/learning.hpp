#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "archmrf/enumerate.hpp"
#include "archmrf/factor_graph.hpp"
#include "archmrf/gibbs.hpp"

namespace archmrf {

/// Black-box objective standing in for the trained super-network: maps an
/// architecture encoding to a scalar loss (lower is better).
struct ObjectiveOracle {
  std::function<double(const Assignment&)> loss;
  bool deterministic = true;
};

struct LossRecord {
  Assignment assignment;
  double loss = 0.0;
};

struct LossTrace {
  std::vector<LossRecord> records;
};

/// Loss-averaging unary estimate: entry (v, a) is the negative mean loss over
/// records where variable v took label a.
struct AowsEstimate {
  FactorGraph graph;                       // unary-only, skeleton's variables and labels
  std::vector<std::vector<bool>> observed; // per variable/label: sampled at least once
  bool any_unobserved = false;             // unseen labels got a pessimistic sentinel
};

AowsEstimate estimate_factors_aows(const LossTrace& trace, const FactorGraph& skeleton);

/// Gradient tables of E_{x~P}[loss] with respect to every factor entry.
struct FactorGradient {
  std::vector<std::vector<double>> unary;
  std::vector<PairTable> pairwise;
};

/// Score-function (likelihood-ratio) estimate from a sample batch:
/// for each entry, mean over samples of loss * (1[entry active] - p_hat),
/// with the activity probability p_hat estimated from the same batch. Equals
/// the batch covariance of loss with the entry's indicator.
FactorGradient grad_expected_loss(const FactorGraph& g, const std::vector<Assignment>& samples,
                                  const std::vector<double>& losses);
FactorGradient grad_expected_loss(const FactorGraph& g, const ObjectiveOracle& oracle,
                                  const std::vector<Assignment>& samples);

/// Exact-expectation variant by full enumeration: Cov_P(loss, indicator).
FactorGradient grad_expected_loss_exact(const FactorGraph& g, const ObjectiveOracle& oracle,
                                        std::uint64_t max_space = kDefaultMaxSpace);

/// E_{x~P}[loss] by full enumeration.
double expected_loss_exact(const FactorGraph& g, const ObjectiveOracle& oracle,
                           std::uint64_t max_space = kDefaultMaxSpace);

struct LearnConfig {
  int epochs = 10;
  int iters_per_epoch = 50;
  LsbsConfig lsbs;
  double step_size = 3e-4;
  int warmup_epochs = 0;  // epochs that sample and record but skip updates
  int window = 64;        // trailing sample window feeding the gradient estimate
  std::uint64_t seed = 0;
};

struct LearnResult {
  FactorGraph graph;
  LossTrace trace;
  std::vector<double> loss_history;  // per-iteration batch mean
  std::uint64_t total_sweeps = 0;
};

/// Gradient ascent on -E_P[loss]: per epoch one long-burn-in draw, then
/// iters_per_epoch rounds of (short-burn-in draw, gradient estimate over the
/// trailing window, factor update). The chain survives factor updates via
/// rebind, so only the short burn-in is paid per iteration.
LearnResult learn_factors(const FactorGraph& skeleton, const ObjectiveOracle& oracle,
                          const LearnConfig& config);

// Synthetic objective families used by tests, benchmarks and the CLI.

struct SeparableOracle {
  ObjectiveOracle oracle;                 // loss(x) = sum_i costs[i][x_i]
  Assignment optimum;                     // unique minimizer
  std::vector<std::vector<double>> costs;
};
SeparableOracle make_separable_oracle(const std::vector<int>& cards, std::uint64_t seed);

struct PairwiseOracle {
  ObjectiveOracle oracle;  // loss(x) = -hidden_score(x)
  FactorGraph hidden;
};
PairwiseOracle make_pairwise_oracle(const FactorGraph& skeleton, std::uint64_t seed,
                                    double coupling = 1.0);

/// Parses "separable:SEED" or "pairwise:SEED[:COUPLING]".
ObjectiveOracle make_oracle_from_spec(const FactorGraph& skeleton, const std::string& spec);

}  // namespace archmrf
