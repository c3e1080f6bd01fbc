#pragma once

#include <vector>

#include "archmrf/factor_graph.hpp"

namespace archmrf {

/// Outcome of MPLP dual coordinate descent. The dual value is a valid upper
/// bound on the exact MAP score at every iterate, so dual >= primal always;
/// a gap within tolerance certifies the decoded assignment as optimal.
struct MplpResult {
  Assignment assignment;
  double primal = 0.0;  // log_energy of the decoded assignment
  double dual = 0.0;    // upper bound on the MAP score
  int iterations = 0;   // full edge sweeps performed
  bool converged = false;
  std::vector<double> dual_history;  // dual before sweeping, then after each sweep
};

/// Approximate MAP via edge-based max-product linear programming.
///
/// Each edge update block-minimizes the LP dual, so the dual sequence is
/// non-increasing. Stops when the dual decrease over a full sweep drops below
/// `tol`, when the primal-dual gap is within `tol` (certified optimum), or at
/// `max_iters`. Decoding takes the per-variable argmax of the reparameterized
/// unaries with lexicographic tie-break. Non-convergence is reported via the
/// flag, never as an error.
MplpResult map_mplp(const FactorGraph& g, int max_iters = 1000, double tol = 1e-7);

/// dual - primal; zero implies global optimality of the decoded assignment.
double certify_gap(const MplpResult& result);

}  // namespace archmrf
