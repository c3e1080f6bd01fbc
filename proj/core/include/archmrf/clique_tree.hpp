#pragma once

#include <cstdint>
#include <vector>

#include "archmrf/elimination.hpp"
#include "archmrf/factor_graph.hpp"

namespace archmrf {

inline constexpr std::uint64_t kDefaultTableBudget = 100'000'000;

/// Tree of maximal cliques of the triangulated graph, with sepsets on the
/// tree edges and every graph factor assigned to exactly one covering clique.
struct CliqueTree {
  struct TreeEdge {
    int a = 0;
    int b = 0;
    std::vector<int> sepset;  // sorted intersection of cliques a and b
  };

  std::vector<std::vector<int>> cliques;  // sorted variable lists
  std::vector<TreeEdge> tree_edges;       // spanning tree (empty sepsets stitch components)
  std::vector<int> unary_home;            // per variable: clique holding its unary factor
  std::vector<int> pairwise_home;         // per graph edge: clique holding its pairwise factor

  int num_cliques() const { return static_cast<int>(cliques.size()); }
};

/// Maximal cliques of the chordal supergraph arranged into a max-sepset-weight
/// spanning tree. Family preservation and the running intersection property
/// are verified after construction; a violation throws std::logic_error.
CliqueTree build_clique_tree(const FactorGraph& g, const EliminationOrder& order);

/// Per-clique max-marginal tables after a full two-pass max-sum calibration.
struct MaxSumCalibration {
  std::vector<std::vector<double>> beliefs;  // flattened clique tables, last var fastest
  double map_score = 0.0;                    // max of any calibrated belief
};

MaxSumCalibration calibrate_max_sum(const FactorGraph& g, const CliqueTree& tree,
                                    std::uint64_t table_budget = kDefaultTableBudget);

/// Exact MAP via min-fill triangulation and clique-tree max-sum.
///
/// Decoding conditions variables one at a time in index order, re-collecting
/// max-marginals after each choice, so the returned assignment is the
/// lexicographically smallest maximizer and is consistent under ties.
/// Throws BudgetExceededError when a clique table would exceed the budget.
ScoredAssignment map_clique_tree(const FactorGraph& g,
                                 std::uint64_t table_budget = kDefaultTableBudget);

}  // namespace archmrf
