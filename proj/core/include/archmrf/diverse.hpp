#pragma once

#include <cstdint>
#include <vector>

#include "archmrf/clique_tree.hpp"
#include "archmrf/factor_graph.hpp"

namespace archmrf {

enum class MapSolver { Exact, Mplp };

MapSolver map_solver_from_string(const std::string& s);
std::string to_string(MapSolver solver);

/// MAP through either backend; the MPLP branch returns the decoded assignment
/// with its primal score.
ScoredAssignment solve_map(const FactorGraph& g, MapSolver solver,
                           std::uint64_t table_budget = kDefaultTableBudget);

struct DiverseConfig {
  int m = 5;        // number of solutions
  double L = 10.0;  // diversity divisor; larger L means weaker penalties
  MapSolver solver = MapSolver::Exact;
};

/// Ranked solutions scored against the ORIGINAL graph, with the per-round
/// per-variable penalty strengths used to produce them. Repeats of an earlier
/// solution are allowed (the Hamming penalty is soft) and flagged.
struct DiverseSolutionSet {
  std::vector<ScoredAssignment> solutions;
  std::vector<bool> duplicate;
  std::vector<std::vector<double>> lambdas;  // lambdas[p] modified graph p+1 into graph p+2
};

/// Per-variable penalty strength (max - min of the variable's CURRENT unary
/// table) / L, computed from already-modified unaries.
std::vector<double> lambda_vector(const FactorGraph& g, double L);

/// Subtracts lambda[v] from the unary entry that `previous` selects at each
/// variable; pairwise tables and the constant are untouched.
FactorGraph apply_hamming_penalty(const FactorGraph& g, const Assignment& previous,
                                  const std::vector<double>& lambda);

/// Iterated MAP with cumulative Hamming penalties against all prior solutions.
/// Solution 1 is the MAP of the unmodified graph; before each further round
/// the penalty scale is recomputed from the current modified unaries.
DiverseSolutionSet diverse_mbest(const FactorGraph& g, const DiverseConfig& config);

}  // namespace archmrf
