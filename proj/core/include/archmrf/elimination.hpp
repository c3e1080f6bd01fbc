#pragma once

#include <vector>

#include "archmrf/factor_graph.hpp"

namespace archmrf {

/// Variable elimination order plus the fill-in edges it induces.
struct EliminationOrder {
  std::vector<int> order;             // permutation of variable indices
  std::vector<GraphEdge> fill_edges;  // edges added during triangulation
};

/// Greedy min-fill triangulation: at each step eliminate the variable whose
/// remaining neighbors need the fewest new edges to become a clique, ties
/// broken by smallest index. The original edges plus fill_edges form a
/// chordal supergraph.
EliminationOrder triangulate_minfill(const FactorGraph& g);

/// Size of the largest clique after min-fill triangulation; an upper bound
/// on treewidth+1 (heuristic, deterministic). Exact inference over the
/// resulting clique tree costs O(k^clique_size) table entries.
int clique_size(const FactorGraph& g);

}  // namespace archmrf
