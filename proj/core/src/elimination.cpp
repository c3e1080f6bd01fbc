#include "archmrf/elimination.hpp"

#include <algorithm>
#include <set>

namespace archmrf {

namespace {

std::vector<std::set<int>> adjacency_sets(const FactorGraph& g) {
  std::vector<std::set<int>> adj(g.num_vars());
  for (int e = 0; e < g.num_edges(); ++e) {
    adj[g.edge(e).i].insert(g.edge(e).j);
    adj[g.edge(e).j].insert(g.edge(e).i);
  }
  return adj;
}

}  // namespace

EliminationOrder triangulate_minfill(const FactorGraph& g) {
  const int n = g.num_vars();
  std::vector<std::set<int>> adj = adjacency_sets(g);
  std::vector<bool> eliminated(n, false);

  EliminationOrder result;
  result.order.reserve(n);

  for (int step = 0; step < n; ++step) {
    int best = -1;
    long best_fill = -1;
    for (int v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      long fill = 0;
      for (auto it = adj[v].begin(); it != adj[v].end(); ++it) {
        for (auto jt = std::next(it); jt != adj[v].end(); ++jt) {
          if (!adj[*it].count(*jt)) ++fill;
        }
      }
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }

    result.order.push_back(best);
    eliminated[best] = true;
    // connect the remaining neighbors of `best` into a clique
    std::vector<int> nbrs(adj[best].begin(), adj[best].end());
    for (std::size_t a = 0; a < nbrs.size(); ++a) {
      for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
        if (!adj[nbrs[a]].count(nbrs[b])) {
          adj[nbrs[a]].insert(nbrs[b]);
          adj[nbrs[b]].insert(nbrs[a]);
          result.fill_edges.push_back({std::min(nbrs[a], nbrs[b]), std::max(nbrs[a], nbrs[b])});
        }
      }
    }
    for (int u : nbrs) adj[u].erase(best);
    adj[best].clear();
  }
  return result;
}

int clique_size(const FactorGraph& g) {
  if (g.num_vars() == 0) return 0;
  EliminationOrder eo = triangulate_minfill(g);

  std::vector<std::set<int>> adj = adjacency_sets(g);
  for (const GraphEdge& ed : eo.fill_edges) {
    adj[ed.i].insert(ed.j);
    adj[ed.j].insert(ed.i);
  }

  std::vector<int> pos(g.num_vars());
  for (std::size_t k = 0; k < eo.order.size(); ++k) pos[eo.order[k]] = static_cast<int>(k);

  int largest = 1;
  for (int v = 0; v < g.num_vars(); ++v) {
    int later = 0;
    for (int u : adj[v]) {
      if (pos[u] > pos[v]) ++later;
    }
    largest = std::max(largest, later + 1);
  }
  return largest;
}

}  // namespace archmrf
