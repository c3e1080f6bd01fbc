#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "archmrf/arch_template.hpp"
#include "archmrf/diverse.hpp"
#include "archmrf/factor_graph.hpp"
#include "archmrf/learning.hpp"
#include "archmrf/resource_model.hpp"

namespace archmrf {

struct ResourceTarget {
  double value = 0.0;
  ResourceUnit unit = ResourceUnit::Macs;
};

struct SearchConfig {
  ResourceTarget target;
  int n_iter = 20;          // bisection iterations per bracketing pass
  DiverseConfig diverse;    // m, L and the MAP backend
  double gamma_lo = -1.0;   // initial bracket is [gamma_lo, 0]
  std::uint64_t enumeration_cap = 1'000'000;  // gap reporting threshold
  std::uint64_t table_budget = kDefaultTableBudget;
};

struct GammaProbe {
  double gamma = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double combined_score = 0.0;  // MAP score of the penalized graph
  double perf_score = 0.0;      // same assignment scored on the performance graph
  double resource = 0.0;
  bool feasible = false;
};

struct SearchSolution {
  Assignment assignment;
  double perf = 0.0;
  double resource = 0.0;
  bool feasible = false;
  bool duplicate = false;
};

struct SearchReport {
  SearchConfig config;
  std::vector<GammaProbe> probes;
  double final_gamma = 0.0;  // best feasible gamma seen
  std::vector<SearchSolution> solutions;
  int inference_count = 0;
  // duality-gap reporting: brute-force optimum when the space is enumerable,
  // otherwise the MPLP dual bound at the final gamma (mplp backend only)
  bool enumerable = false;
  double brute_best_perf = 0.0;
  Assignment brute_best;
  bool has_dual_bound = false;
  double dual_bound = 0.0;
};

/// Lagrangian bisection on gamma over [gamma_lo, 0]: each iteration solves the
/// MAP of perf + gamma * (resource - target) at the bracket midpoint, tightens
/// toward stronger penalties while infeasible and weaker ones while feasible.
/// If no midpoint is feasible, gamma_lo is doubled up to 20 times (probing
/// each expansion) and the bisection re-runs in the expanded bracket. Diverse
/// M-best then runs once at the best feasible gamma. Throws InfeasibleError,
/// carrying the minimum resource seen, when expansion never reaches
/// feasibility; throws std::invalid_argument on a target/resource unit
/// mismatch.
SearchReport binary_search_gamma(const FactorGraph& perf, const ResourceGraph& res,
                                 const SearchConfig& config);

struct SyntheticGroundTruth {
  double percentile = 0.0;  // of the resource distribution over all assignments
  double target = 0.0;
  double best_perf = 0.0;  // brute-force constrained optimum
  Assignment best;
};

struct SyntheticInstance {
  FactorGraph perf;
  ResourceGraph res;
  double min_resource = 0.0;
  double max_resource = 0.0;
  std::vector<SyntheticGroundTruth> ground_truth;  // at the 25th/50th/75th percentiles
};

/// Random enumerable perf/resource pair with brute-force ground truth.
/// Performance unaries are standard normal with pairwise scale `noise`;
/// resource entries are positive. Deterministic per seed.
SyntheticInstance synthetic_benchmark(std::uint64_t seed, int n_vars, int k, double edge_prob,
                                      double noise);

struct PipelineConfig {
  LearnConfig learn;
  SearchConfig search;
};

struct PipelineResult {
  FactorGraph learned;
  SearchReport report;
  std::vector<double> loss_history;
  std::vector<NetConfig> decoded;  // one per solution when built from a template
};

/// learn_factors -> constrained search -> (optionally) decode.
PipelineResult run_pipeline(const FactorGraph& skeleton, const ObjectiveOracle& oracle,
                            const ResourceGraph& res, const PipelineConfig& config);

/// Template front end: the resource model is the exact FLOPs decomposition
/// and every reported solution is decoded into a layer configuration.
PipelineResult run_pipeline(const Template& t, const ObjectiveOracle& oracle,
                            const PipelineConfig& config);

// Lossless text round trip ("search-report v1"); fixed seeds give
// byte-identical files.
void save_search_report(const std::string& path, const SearchReport& report);
void save_search_report(std::ostream& os, const SearchReport& report);
SearchReport load_search_report(const std::string& path);

}  // namespace archmrf
