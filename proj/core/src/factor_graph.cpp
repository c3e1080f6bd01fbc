#include "archmrf/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace archmrf {

LabelSet LabelSet::indexed(int k) {
  LabelSet s;
  s.labels.reserve(k);
  for (int i = 0; i < k; ++i) s.labels.push_back(std::to_string(i));
  return s;
}

std::string to_string(ResourceUnit unit) {
  return unit == ResourceUnit::Macs ? "macs" : "ms";
}

ResourceUnit resource_unit_from_string(const std::string& s) {
  if (s == "macs") return ResourceUnit::Macs;
  if (s == "ms") return ResourceUnit::Milliseconds;
  throw std::invalid_argument("unknown resource unit '" + s + "' (expected macs|ms)");
}

namespace {

void check_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument("non-finite value in " + where);
  }
}

}  // namespace

FactorGraph::FactorGraph(std::vector<LabelSet> label_sets,
                         std::vector<std::vector<double>> unary,
                         std::vector<GraphEdge> edges,
                         std::vector<PairTable> pairwise,
                         double constant)
    : label_sets_(std::move(label_sets)),
      unary_(std::move(unary)),
      edges_(std::move(edges)),
      pairwise_(std::move(pairwise)),
      constant_(constant) {
  const int n = num_vars();
  for (int v = 0; v < n; ++v) {
    if (label_sets_[v].size() <= 0) {
      throw std::invalid_argument("variable " + std::to_string(v) + " has an empty label set");
    }
  }
  check_finite(constant_, "constant");

  if (static_cast<int>(unary_.size()) > n) {
    throw std::invalid_argument("more unary tables than variables");
  }
  unary_.resize(n);
  for (int v = 0; v < n; ++v) {
    if (unary_[v].empty()) {
      unary_[v].assign(num_labels(v), 0.0);
    } else if (static_cast<int>(unary_[v].size()) != num_labels(v)) {
      throw std::invalid_argument("unary table for variable " + std::to_string(v) +
                                  " has size " + std::to_string(unary_[v].size()) +
                                  ", expected " + std::to_string(num_labels(v)));
    }
    for (double x : unary_[v]) check_finite(x, "unary table of variable " + std::to_string(v));
  }

  if (pairwise_.size() != edges_.size()) {
    throw std::invalid_argument("edge list and pairwise table list differ in length");
  }
  std::map<std::pair<int, int>, int> seen;
  for (int e = 0; e < num_edges(); ++e) {
    GraphEdge& ed = edges_[e];
    if (ed.i == ed.j) {
      throw std::invalid_argument("self-loop on variable " + std::to_string(ed.i));
    }
    if (ed.i < 0 || ed.j < 0 || ed.i >= n || ed.j >= n) {
      throw std::invalid_argument("edge (" + std::to_string(ed.i) + "," + std::to_string(ed.j) +
                                  ") references an invalid variable");
    }
    if (ed.i > ed.j) {
      // normalize orientation; transpose the table to match
      PairTable t(pairwise_[e].cols, pairwise_[e].rows);
      for (int a = 0; a < pairwise_[e].rows; ++a)
        for (int b = 0; b < pairwise_[e].cols; ++b) t.at(b, a) = pairwise_[e].at(a, b);
      pairwise_[e] = std::move(t);
      std::swap(ed.i, ed.j);
    }
    if (!seen.emplace(std::make_pair(ed.i, ed.j), e).second) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(ed.i) + "," +
                                  std::to_string(ed.j) + ")");
    }
    const PairTable& t = pairwise_[e];
    if (t.rows != num_labels(ed.i) || t.cols != num_labels(ed.j)) {
      throw std::invalid_argument("pairwise table on edge (" + std::to_string(ed.i) + "," +
                                  std::to_string(ed.j) + ") has shape " + std::to_string(t.rows) +
                                  "x" + std::to_string(t.cols) + ", expected " +
                                  std::to_string(num_labels(ed.i)) + "x" +
                                  std::to_string(num_labels(ed.j)));
    }
    if (t.values.size() != static_cast<std::size_t>(t.rows) * t.cols) {
      throw std::invalid_argument("pairwise table storage does not match its declared shape");
    }
    for (double x : t.values) {
      check_finite(x, "pairwise table on edge (" + std::to_string(ed.i) + "," +
                          std::to_string(ed.j) + ")");
    }
  }

  incidence_.assign(n, {});
  for (int e = 0; e < num_edges(); ++e) {
    incidence_[edges_[e].i].push_back({e, edges_[e].j, true});
    incidence_[edges_[e].j].push_back({e, edges_[e].i, false});
  }
}

int FactorGraph::find_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const Incidence& inc : incidence_[i]) {
    if (inc.is_first && inc.neighbor == j) return inc.edge;
  }
  return -1;
}

std::vector<int> FactorGraph::cardinalities() const {
  std::vector<int> cards(num_vars());
  for (int v = 0; v < num_vars(); ++v) cards[v] = num_labels(v);
  return cards;
}

bool FactorGraph::same_structure(const FactorGraph& other) const {
  if (num_vars() != other.num_vars()) return false;
  for (int v = 0; v < num_vars(); ++v) {
    if (num_labels(v) != other.num_labels(v)) return false;
  }
  return true;
}

void validate_assignment(const FactorGraph& g, const Assignment& a) {
  if (static_cast<int>(a.size()) != g.num_vars()) {
    throw std::invalid_argument("assignment has " + std::to_string(a.size()) +
                                " entries, graph has " + std::to_string(g.num_vars()) +
                                " variables");
  }
  for (int v = 0; v < g.num_vars(); ++v) {
    if (a[v] < 0 || a[v] >= g.num_labels(v)) {
      throw std::invalid_argument("label " + std::to_string(a[v]) + " out of range for variable " +
                                  std::to_string(v));
    }
  }
}

double log_energy(const FactorGraph& g, const Assignment& a) {
  validate_assignment(g, a);
  double s = g.constant();
  for (int v = 0; v < g.num_vars(); ++v) s += g.unary(v, a[v]);
  for (int e = 0; e < g.num_edges(); ++e) {
    const GraphEdge& ed = g.edge(e);
    s += g.pairwise(e).at(a[ed.i], a[ed.j]);
  }
  return s;
}

FactorGraph combine_lagrangian(const FactorGraph& perf, const ResourceGraph& res,
                               double gamma, double target) {
  const FactorGraph& r = res.graph;
  if (!perf.same_structure(r)) {
    throw std::invalid_argument("performance and resource graphs differ in variable structure");
  }

  std::vector<std::vector<double>> unary = perf.unaries();
  for (int v = 0; v < perf.num_vars(); ++v) {
    for (int a = 0; a < perf.num_labels(v); ++a) unary[v][a] += gamma * r.unary(v, a);
  }

  // union of edge sets: perf edges first, then resource-only edges
  std::vector<GraphEdge> edges = perf.edges();
  std::vector<PairTable> pairwise = perf.pairwise_tables();
  for (int e = 0; e < perf.num_edges(); ++e) {
    const GraphEdge& ed = edges[e];
    int re = r.find_edge(ed.i, ed.j);
    if (re < 0) continue;
    const PairTable& rt = r.pairwise(re);
    for (std::size_t k = 0; k < pairwise[e].values.size(); ++k) {
      pairwise[e].values[k] += gamma * rt.values[k];
    }
  }
  for (int re = 0; re < r.num_edges(); ++re) {
    const GraphEdge& ed = r.edge(re);
    if (perf.find_edge(ed.i, ed.j) >= 0) continue;
    PairTable t = r.pairwise(re);
    for (double& x : t.values) x *= gamma;
    edges.push_back(ed);
    pairwise.push_back(std::move(t));
  }

  double constant = perf.constant() + gamma * (r.constant() - target);
  return FactorGraph(perf.label_sets(), std::move(unary), std::move(edges), std::move(pairwise),
                     constant);
}

}  // namespace archmrf
