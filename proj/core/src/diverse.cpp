#include "archmrf/diverse.hpp"

#include <algorithm>

#include "archmrf/mplp.hpp"

namespace archmrf {

MapSolver map_solver_from_string(const std::string& s) {
  if (s == "exact") return MapSolver::Exact;
  if (s == "mplp") return MapSolver::Mplp;
  throw std::invalid_argument("unknown solver '" + s + "' (expected exact|mplp)");
}

std::string to_string(MapSolver solver) {
  return solver == MapSolver::Exact ? "exact" : "mplp";
}

ScoredAssignment solve_map(const FactorGraph& g, MapSolver solver, std::uint64_t table_budget) {
  if (solver == MapSolver::Exact) return map_clique_tree(g, table_budget);
  MplpResult r = map_mplp(g);
  return {std::move(r.assignment), r.primal};
}

std::vector<double> lambda_vector(const FactorGraph& g, double L) {
  if (!(L > 0)) throw std::invalid_argument("diversity divisor L must be positive");
  std::vector<double> lambda(g.num_vars(), 0.0);
  for (int v = 0; v < g.num_vars(); ++v) {
    const std::vector<double>& u = g.unary(v);
    auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    lambda[v] = (*hi - *lo) / L;
  }
  return lambda;
}

FactorGraph apply_hamming_penalty(const FactorGraph& g, const Assignment& previous,
                                  const std::vector<double>& lambda) {
  validate_assignment(g, previous);
  if (lambda.size() != static_cast<std::size_t>(g.num_vars())) {
    throw std::invalid_argument("lambda vector length does not match variable count");
  }
  std::vector<std::vector<double>> unary = g.unaries();
  for (int v = 0; v < g.num_vars(); ++v) unary[v][previous[v]] -= lambda[v];
  return FactorGraph(g.label_sets(), std::move(unary), g.edges(), g.pairwise_tables(),
                     g.constant());
}

DiverseSolutionSet diverse_mbest(const FactorGraph& g, const DiverseConfig& config) {
  if (config.m < 1) throw std::invalid_argument("m must be >= 1");

  DiverseSolutionSet out;
  FactorGraph penalized = g;
  for (int p = 0; p < config.m; ++p) {
    ScoredAssignment sol = solve_map(penalized, config.solver);
    bool dup = false;
    for (const ScoredAssignment& prev : out.solutions) {
      if (prev.assignment == sol.assignment) {
        dup = true;
        break;
      }
    }
    // reported score is against the original graph, not the penalized one
    out.solutions.push_back({sol.assignment, log_energy(g, sol.assignment)});
    out.duplicate.push_back(dup);

    if (p + 1 < config.m) {
      std::vector<double> lambda = lambda_vector(penalized, config.L);
      penalized = apply_hamming_penalty(penalized, sol.assignment, lambda);
      out.lambdas.push_back(std::move(lambda));
    }
  }
  return out;
}

}  // namespace archmrf
