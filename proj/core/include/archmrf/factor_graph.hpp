#pragma once

#include <vector>

#include "archmrf/types.hpp"

namespace archmrf {

/// Pairwise Markov random field in the log domain.
///
/// Holds per-variable unary tables, per-edge pairwise tables and a scalar
/// offset. The additive score of an assignment is
///   constant + sum_i unary[i][x_i] + sum_(i,j) pairwise[i,j][x_i, x_j],
/// i.e. the exponent of the usual product-of-potentials energy. Working in
/// the log domain keeps argmax unchanged and avoids overflow, so the exp is
/// never materialized.
///
/// Immutable after construction; all operations on it are pure functions and
/// safe to call concurrently on a shared graph.
class FactorGraph {
 public:
  /// (edge index, neighbor, whether this variable is the edge's first endpoint).
  struct Incidence {
    int edge = 0;
    int neighbor = 0;
    bool is_first = false;
  };

  FactorGraph() = default;

  /// Validates shapes, rejects duplicate edges, self-loops and non-finite
  /// values. Empty unary tables default to all-zeros.
  FactorGraph(std::vector<LabelSet> label_sets,
              std::vector<std::vector<double>> unary,
              std::vector<GraphEdge> edges,
              std::vector<PairTable> pairwise,
              double constant = 0.0);

  int num_vars() const { return static_cast<int>(label_sets_.size()); }
  int num_labels(int v) const { return label_sets_[v].size(); }
  const LabelSet& label_set(int v) const { return label_sets_[v]; }
  const std::vector<LabelSet>& label_sets() const { return label_sets_; }

  const std::vector<double>& unary(int v) const { return unary_[v]; }
  const std::vector<std::vector<double>>& unaries() const { return unary_; }
  double unary(int v, int a) const { return unary_[v][a]; }

  int num_edges() const { return static_cast<int>(edges_.size()); }
  const GraphEdge& edge(int e) const { return edges_[e]; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const PairTable& pairwise(int e) const { return pairwise_[e]; }
  const std::vector<PairTable>& pairwise_tables() const { return pairwise_; }

  double constant() const { return constant_; }

  /// Edge index for the unordered pair (i, j), or -1 if absent.
  int find_edge(int i, int j) const;

  const std::vector<Incidence>& incident(int v) const { return incidence_[v]; }

  /// Label cardinalities of all variables.
  std::vector<int> cardinalities() const;

  /// True if the two graphs have identical variable counts and label sizes.
  bool same_structure(const FactorGraph& other) const;

 private:
  std::vector<LabelSet> label_sets_;
  std::vector<std::vector<double>> unary_;
  std::vector<GraphEdge> edges_;
  std::vector<PairTable> pairwise_;
  double constant_ = 0.0;
  std::vector<std::vector<Incidence>> incidence_;
};

/// A factor graph whose additive score is a resource in declared units.
struct ResourceGraph {
  FactorGraph graph;
  ResourceUnit unit = ResourceUnit::Macs;
};

/// Throws std::invalid_argument when `a` is not a valid assignment of `g`.
void validate_assignment(const FactorGraph& g, const Assignment& a);

/// Additive log-domain score of `a` under `g`.
double log_energy(const FactorGraph& g, const Assignment& a);

/// Combined graph scoring perf(x) + gamma * (res(x) - target).
///
/// Unary and pairwise tables are added entrywise over the union of edge sets
/// (a table absent on one side counts as zero); the constant absorbs
/// perf.constant + gamma * (res.constant - target). With gamma <= 0 this is
/// the penalized objective of a <=-constraint on the resource.
FactorGraph combine_lagrangian(const FactorGraph& perf, const ResourceGraph& res,
                               double gamma, double target);

}  // namespace archmrf
