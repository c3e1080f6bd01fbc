#include "archmrf/clique_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace archmrf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> sorted_intersection(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Dense log-domain table over a sorted set of variables; last variable fastest.
struct Table {
  std::vector<int> vars;
  std::vector<int> dims;
  std::vector<std::uint64_t> stride;
  std::vector<double> vals;

  void init(const std::vector<int>& clique_vars, const FactorGraph& g) {
    vars = clique_vars;
    dims.resize(vars.size());
    stride.resize(vars.size());
    std::uint64_t size = 1;
    for (std::size_t k = vars.size(); k-- > 0;) {
      dims[k] = g.num_labels(vars[k]);
      stride[k] = size;
      size *= static_cast<std::uint64_t>(dims[k]);
    }
    vals.assign(size, 0.0);
  }

  int label_of(std::uint64_t flat, std::size_t k) const {
    return static_cast<int>((flat / stride[k]) % static_cast<std::uint64_t>(dims[k]));
  }

  std::size_t pos_of(int var) const {
    return std::lower_bound(vars.begin(), vars.end(), var) - vars.begin();
  }

  void add_unary(int var, const std::vector<double>& u) {
    std::size_t k = pos_of(var);
    for (std::uint64_t f = 0; f < vals.size(); ++f) vals[f] += u[label_of(f, k)];
  }

  void add_pairwise(int vi, int vj, const PairTable& t) {
    std::size_t ki = pos_of(vi);
    std::size_t kj = pos_of(vj);
    for (std::uint64_t f = 0; f < vals.size(); ++f) {
      vals[f] += t.at(label_of(f, ki), label_of(f, kj));
    }
  }
};

// Mixed-radix index of the sepset labels within a clique table entry.
struct SepProjector {
  std::vector<std::size_t> positions;  // position of each sepset var in the clique
  std::vector<std::uint64_t> radix;    // running products, last fastest
  std::uint64_t size = 1;

  SepProjector(const Table& t, const std::vector<int>& sepset) {
    positions.reserve(sepset.size());
    for (int v : sepset) positions.push_back(t.pos_of(v));
    radix.resize(sepset.size());
    for (std::size_t k = sepset.size(); k-- > 0;) {
      radix[k] = size;
      size *= static_cast<std::uint64_t>(t.dims[positions[k]]);
    }
  }

  std::uint64_t index(const Table& t, std::uint64_t flat) const {
    std::uint64_t idx = 0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
      idx += radix[k] * static_cast<std::uint64_t>(t.label_of(flat, positions[k]));
    }
    return idx;
  }
};

struct TreeWorkspace {
  const FactorGraph* graph = nullptr;
  const CliqueTree* tree = nullptr;
  std::vector<Table> potentials;
  std::vector<std::vector<std::pair<int, int>>> adj;  // clique -> (tree edge, other clique)

  // Message storage: slot 2e+0 holds the message directed toward edge e's
  // clique `a`, slot 2e+1 the one toward clique `b`.
  std::size_t slot_toward(int e, int to) const {
    return static_cast<std::size_t>(e) * 2 + (tree->tree_edges[e].a == to ? 0 : 1);
  }

  void build(const FactorGraph& g, const CliqueTree& t, std::uint64_t budget) {
    graph = &g;
    tree = &t;
    for (const std::vector<int>& c : t.cliques) {
      std::uint64_t entries = 1;
      for (int v : c) {
        entries *= static_cast<std::uint64_t>(g.num_labels(v));
        if (entries > budget) {
          throw BudgetExceededError(
              "clique of " + std::to_string(c.size()) + " variables needs more than " +
                  std::to_string(budget) + " table entries",
              static_cast<int>(c.size()), static_cast<double>(entries));
        }
      }
    }

    potentials.resize(t.num_cliques());
    for (int c = 0; c < t.num_cliques(); ++c) potentials[c].init(t.cliques[c], g);
    for (int v = 0; v < g.num_vars(); ++v) {
      potentials[t.unary_home[v]].add_unary(v, g.unary(v));
    }
    for (int e = 0; e < g.num_edges(); ++e) {
      const GraphEdge& ed = g.edge(e);
      potentials[t.pairwise_home[e]].add_pairwise(ed.i, ed.j, g.pairwise(e));
    }
    if (t.num_cliques() > 0 && !potentials[0].vals.empty()) {
      for (double& x : potentials[0].vals) x += g.constant();
    }

    adj.assign(t.num_cliques(), {});
    for (std::size_t e = 0; e < t.tree_edges.size(); ++e) {
      adj[t.tree_edges[e].a].push_back({static_cast<int>(e), t.tree_edges[e].b});
      adj[t.tree_edges[e].b].push_back({static_cast<int>(e), t.tree_edges[e].a});
    }
  }

  bool entry_allowed(const Table& t, std::uint64_t flat, const std::vector<int>& clamps) const {
    for (std::size_t k = 0; k < t.vars.size(); ++k) {
      int c = clamps[t.vars[k]];
      if (c >= 0 && t.label_of(flat, k) != c) return false;
    }
    return true;
  }

  // Max-projection of (potential[src] + incoming messages except via skip_edge)
  // onto the sepset of tree edge `edge_idx`.
  std::vector<double> compute_message(int src, int edge_idx,
                                      const std::vector<std::vector<double>>& messages_in,
                                      const std::vector<int>& clamps) const {
    const Table& t = potentials[src];
    std::vector<double> work = t.vals;
    for (const auto& [e, other] : adj[src]) {
      if (e == edge_idx) continue;
      const std::vector<double>& msg = messages_in[slot_toward(e, src)];
      if (msg.empty()) continue;
      SepProjector proj(t, tree->tree_edges[e].sepset);
      for (std::uint64_t f = 0; f < work.size(); ++f) work[f] += msg[proj.index(t, f)];
    }
    SepProjector proj(t, tree->tree_edges[edge_idx].sepset);
    std::vector<double> out(proj.size, kNegInf);
    for (std::uint64_t f = 0; f < work.size(); ++f) {
      if (!entry_allowed(t, f, clamps)) continue;
      std::uint64_t s = proj.index(t, f);
      if (work[f] > out[s]) out[s] = work[f];
    }
    return out;
  }

  // One upward pass: every message directed toward `root`, children first.
  std::vector<std::vector<double>> collect(int root, const std::vector<int>& clamps) const {
    const int nc = tree->num_cliques();
    std::vector<std::vector<double>> messages(tree->tree_edges.size() * 2);
    std::vector<int> parent(nc, -1), parent_edge(nc, -1), dfs_order;
    dfs_order.reserve(nc);
    std::vector<bool> seen(nc, false);
    std::vector<int> stack{root};
    seen[root] = true;
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      dfs_order.push_back(c);
      for (const auto& [e, other] : adj[c]) {
        if (seen[other]) continue;
        seen[other] = true;
        parent[other] = c;
        parent_edge[other] = e;
        stack.push_back(other);
      }
    }
    // leaves first
    for (std::size_t k = dfs_order.size(); k-- > 0;) {
      int c = dfs_order[k];
      if (parent[c] < 0) continue;
      int e = parent_edge[c];
      messages[slot_toward(e, parent[c])] = compute_message(c, e, messages, clamps);
    }
    return messages;
  }

  std::vector<double> belief(int c, const std::vector<std::vector<double>>& messages) const {
    const Table& t = potentials[c];
    std::vector<double> out = t.vals;
    for (const auto& [e, other] : adj[c]) {
      const std::vector<double>& msg = messages[slot_toward(e, c)];
      if (msg.empty()) continue;
      SepProjector proj(t, tree->tree_edges[e].sepset);
      for (std::uint64_t f = 0; f < out.size(); ++f) out[f] += msg[proj.index(t, f)];
    }
    return out;
  }
};

}  // namespace

CliqueTree build_clique_tree(const FactorGraph& g, const EliminationOrder& order) {
  const int n = g.num_vars();
  if (static_cast<int>(order.order.size()) != n) {
    throw std::invalid_argument("elimination order length does not match variable count");
  }

  std::vector<std::set<int>> adj(n);
  for (int e = 0; e < g.num_edges(); ++e) {
    adj[g.edge(e).i].insert(g.edge(e).j);
    adj[g.edge(e).j].insert(g.edge(e).i);
  }
  for (const GraphEdge& ed : order.fill_edges) {
    adj[ed.i].insert(ed.j);
    adj[ed.j].insert(ed.i);
  }

  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[order.order[k]] = k;

  // elimination cliques: a variable plus its later neighbors in the chordal graph
  std::vector<std::vector<int>> candidates;
  candidates.reserve(n);
  for (int v = 0; v < n; ++v) {
    std::vector<int> c{v};
    for (int u : adj[v]) {
      if (pos[u] > pos[v]) c.push_back(u);
    }
    std::sort(c.begin(), c.end());
    candidates.push_back(std::move(c));
  }

  // keep maximal cliques only
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::vector<std::vector<int>> cliques;
  for (const std::vector<int>& c : candidates) {
    bool subset = false;
    for (const std::vector<int>& kept : cliques) {
      if (std::includes(kept.begin(), kept.end(), c.begin(), c.end())) {
        subset = true;
        break;
      }
    }
    if (!subset) cliques.push_back(c);
  }
  std::sort(cliques.begin(), cliques.end());

  CliqueTree tree;
  tree.cliques = std::move(cliques);
  const int nc = tree.num_cliques();

  // max-sepset-weight spanning tree; weight-0 edges stitch disconnected parts
  struct Candidate {
    int w, a, b;
  };
  std::vector<Candidate> cand;
  for (int a = 0; a < nc; ++a) {
    for (int b = a + 1; b < nc; ++b) {
      cand.push_back({static_cast<int>(
                          sorted_intersection(tree.cliques[a], tree.cliques[b]).size()),
                      a, b});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
    if (x.w != y.w) return x.w > y.w;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  UnionFind uf(nc);
  for (const Candidate& c : cand) {
    if (static_cast<int>(tree.tree_edges.size()) == nc - 1) break;
    if (uf.unite(c.a, c.b)) {
      tree.tree_edges.push_back(
          {c.a, c.b, sorted_intersection(tree.cliques[c.a], tree.cliques[c.b])});
    }
  }

  // assign every factor to the first covering clique
  tree.unary_home.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    for (int c = 0; c < nc; ++c) {
      if (std::binary_search(tree.cliques[c].begin(), tree.cliques[c].end(), v)) {
        tree.unary_home[v] = c;
        break;
      }
    }
    if (tree.unary_home[v] < 0) {
      throw std::logic_error("family preservation violated: variable " + std::to_string(v) +
                             " is in no clique");
    }
  }
  tree.pairwise_home.assign(g.num_edges(), -1);
  for (int e = 0; e < g.num_edges(); ++e) {
    const GraphEdge& ed = g.edge(e);
    for (int c = 0; c < nc; ++c) {
      if (std::binary_search(tree.cliques[c].begin(), tree.cliques[c].end(), ed.i) &&
          std::binary_search(tree.cliques[c].begin(), tree.cliques[c].end(), ed.j)) {
        tree.pairwise_home[e] = c;
        break;
      }
    }
    if (tree.pairwise_home[e] < 0) {
      throw std::logic_error("family preservation violated: edge (" + std::to_string(ed.i) + "," +
                             std::to_string(ed.j) + ") is in no clique");
    }
  }

  // running intersection: cliques containing any given variable form a subtree
  for (int v = 0; v < n; ++v) {
    std::vector<int> holding;
    for (int c = 0; c < nc; ++c) {
      if (std::binary_search(tree.cliques[c].begin(), tree.cliques[c].end(), v)) {
        holding.push_back(c);
      }
    }
    if (holding.size() <= 1) continue;
    std::set<int> member(holding.begin(), holding.end());
    std::set<int> reached{holding.front()};
    std::vector<int> stack{holding.front()};
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      for (const CliqueTree::TreeEdge& te : tree.tree_edges) {
        int other = -1;
        if (te.a == c) other = te.b;
        if (te.b == c) other = te.a;
        if (other < 0 || !member.count(other) || reached.count(other)) continue;
        if (!std::binary_search(te.sepset.begin(), te.sepset.end(), v)) continue;
        reached.insert(other);
        stack.push_back(other);
      }
    }
    if (reached.size() != member.size()) {
      throw std::logic_error("running intersection property violated for variable " +
                             std::to_string(v));
    }
  }

  return tree;
}

MaxSumCalibration calibrate_max_sum(const FactorGraph& g, const CliqueTree& tree,
                                    std::uint64_t table_budget) {
  TreeWorkspace ws;
  ws.build(g, tree, table_budget);
  std::vector<int> clamps(g.num_vars(), -1);

  // collect to clique 0, then push messages outward in BFS order
  std::vector<std::vector<double>> messages = ws.collect(0, clamps);
  std::vector<bool> seen(tree.num_cliques(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    for (const auto& [e, other] : ws.adj[c]) {
      if (seen[other]) continue;
      seen[other] = true;
      messages[ws.slot_toward(e, other)] = ws.compute_message(c, e, messages, clamps);
      stack.push_back(other);
    }
  }

  MaxSumCalibration cal;
  cal.beliefs.reserve(tree.num_cliques());
  cal.map_score = kNegInf;
  for (int c = 0; c < tree.num_cliques(); ++c) {
    cal.beliefs.push_back(ws.belief(c, messages));
    for (double x : cal.beliefs.back()) cal.map_score = std::max(cal.map_score, x);
  }
  return cal;
}

ScoredAssignment map_clique_tree(const FactorGraph& g, std::uint64_t table_budget) {
  EliminationOrder order = triangulate_minfill(g);
  CliqueTree tree = build_clique_tree(g, order);
  TreeWorkspace ws;
  ws.build(g, tree, table_budget);

  // condition one variable at a time; re-collecting keeps the choices globally
  // consistent and yields the lexicographically smallest maximizer under ties
  std::vector<int> clamps(g.num_vars(), -1);
  for (int v = 0; v < g.num_vars(); ++v) {
    int root = tree.unary_home[v];
    std::vector<std::vector<double>> messages = ws.collect(root, clamps);
    std::vector<double> bel = ws.belief(root, messages);
    const Table& t = ws.potentials[root];
    std::size_t k = t.pos_of(v);
    std::vector<double> mu(g.num_labels(v), kNegInf);
    for (std::uint64_t f = 0; f < bel.size(); ++f) {
      if (!ws.entry_allowed(t, f, clamps)) continue;
      int a = t.label_of(f, k);
      if (bel[f] > mu[a]) mu[a] = bel[f];
    }
    double best = *std::max_element(mu.begin(), mu.end());
    for (int a = 0; a < g.num_labels(v); ++a) {
      if (mu[a] >= best - 1e-9) {
        clamps[v] = a;
        break;
      }
    }
  }

  ScoredAssignment result;
  result.assignment.assign(clamps.begin(), clamps.end());
  result.score = log_energy(g, result.assignment);
  return result;
}

}  // namespace archmrf
