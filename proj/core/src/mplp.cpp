#include "archmrf/mplp.hpp"

#include <algorithm>
#include <limits>

namespace archmrf {

namespace {

// Reparameterized unaries plus per-edge dual messages.
//
// For edge e = (i, j) with potential theta, delta_i/delta_j are the messages
// the edge sends into its endpoints. The node term is
//   b_i = unary_i + sum_{e incident} delta_{e->i}
// and the edge slack term is theta - delta_i - delta_j. The dual objective
//   sum_i max b_i + sum_e max slack_e + constant
// upper-bounds the MAP score for any messages.
struct State {
  const FactorGraph& g;
  std::vector<std::vector<double>> delta_i;  // per edge, length k_i
  std::vector<std::vector<double>> delta_j;  // per edge, length k_j
  std::vector<std::vector<double>> belief;   // per variable

  explicit State(const FactorGraph& graph) : g(graph) {
    delta_i.resize(g.num_edges());
    delta_j.resize(g.num_edges());
    for (int e = 0; e < g.num_edges(); ++e) {
      delta_i[e].assign(g.num_labels(g.edge(e).i), 0.0);
      delta_j[e].assign(g.num_labels(g.edge(e).j), 0.0);
    }
    belief.resize(g.num_vars());
    for (int v = 0; v < g.num_vars(); ++v) belief[v] = g.unary(v);
  }

  // Block-optimal update of both messages of edge e.
  void update_edge(int e) {
    const GraphEdge& ed = g.edge(e);
    const PairTable& theta = g.pairwise(e);
    const int ki = theta.rows;
    const int kj = theta.cols;

    std::vector<double> bmi(ki), bmj(kj);
    for (int a = 0; a < ki; ++a) bmi[a] = belief[ed.i][a] - delta_i[e][a];
    for (int b = 0; b < kj; ++b) bmj[b] = belief[ed.j][b] - delta_j[e][b];

    for (int a = 0; a < ki; ++a) {
      double m = -std::numeric_limits<double>::infinity();
      for (int b = 0; b < kj; ++b) m = std::max(m, theta.at(a, b) + bmj[b]);
      delta_i[e][a] = 0.5 * (m - bmi[a]);
      belief[ed.i][a] = bmi[a] + delta_i[e][a];
    }
    for (int b = 0; b < kj; ++b) {
      double m = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < ki; ++a) m = std::max(m, theta.at(a, b) + bmi[a]);
      delta_j[e][b] = 0.5 * (m - bmj[b]);
      belief[ed.j][b] = bmj[b] + delta_j[e][b];
    }
  }

  double dual() const {
    double d = g.constant();
    for (int v = 0; v < g.num_vars(); ++v) {
      d += *std::max_element(belief[v].begin(), belief[v].end());
    }
    for (int e = 0; e < g.num_edges(); ++e) {
      const PairTable& theta = g.pairwise(e);
      double m = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < theta.rows; ++a) {
        for (int b = 0; b < theta.cols; ++b) {
          m = std::max(m, theta.at(a, b) - delta_i[e][a] - delta_j[e][b]);
        }
      }
      d += m;
    }
    return d;
  }

  Assignment decode() const {
    Assignment a(g.num_vars(), 0);
    for (int v = 0; v < g.num_vars(); ++v) {
      int best = 0;
      for (int k = 1; k < g.num_labels(v); ++k) {
        if (belief[v][k] > belief[v][best]) best = k;
      }
      a[v] = best;
    }
    return a;
  }
};

}  // namespace

MplpResult map_mplp(const FactorGraph& g, int max_iters, double tol) {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");

  State state(g);
  MplpResult result;
  double dual = state.dual();
  result.dual_history.push_back(dual);
  result.assignment = state.decode();
  result.primal = log_energy(g, result.assignment);

  for (int it = 0; it < max_iters && g.num_edges() > 0; ++it) {
    for (int e = 0; e < g.num_edges(); ++e) state.update_edge(e);
    double prev = dual;
    dual = state.dual();
    result.dual_history.push_back(dual);
    result.iterations = it + 1;

    result.assignment = state.decode();
    result.primal = log_energy(g, result.assignment);
    if (dual - result.primal <= tol) break;
    if (prev - dual < tol) break;
  }

  result.dual = dual;
  result.converged = (result.dual - result.primal) <= tol;
  return result;
}

double certify_gap(const MplpResult& result) { return result.dual - result.primal; }

}  // namespace archmrf
