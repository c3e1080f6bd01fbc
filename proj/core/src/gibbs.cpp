#include "archmrf/gibbs.hpp"

#include <algorithm>
#include <cmath>

namespace archmrf {

GibbsChain::GibbsChain(const FactorGraph& g, std::uint64_t seed) : graph(&g), rng(seed) {
  state.resize(g.num_vars());
  for (int v = 0; v < g.num_vars(); ++v) {
    std::uniform_int_distribution<int> pick(0, g.num_labels(v) - 1);
    state[v] = pick(rng);
  }
}

void GibbsChain::rebind(const FactorGraph& g) {
  if (!graph->same_structure(g)) {
    throw std::invalid_argument("rebind target has a different variable structure");
  }
  graph = &g;
}

std::vector<double> gibbs_conditional(const FactorGraph& g, const Assignment& state, int var) {
  validate_assignment(g, state);
  const int k = g.num_labels(var);
  std::vector<double> score(g.unary(var));
  for (const FactorGraph::Incidence& inc : g.incident(var)) {
    const PairTable& t = g.pairwise(inc.edge);
    const int other = state[inc.neighbor];
    for (int a = 0; a < k; ++a) {
      score[a] += inc.is_first ? t.at(a, other) : t.at(other, a);
    }
  }
  double mx = *std::max_element(score.begin(), score.end());
  double z = 0.0;
  for (double& s : score) {
    s = std::exp(s - mx);
    z += s;
  }
  for (double& s : score) s /= z;
  return score;
}

void gibbs_sweep(GibbsChain& chain) {
  const FactorGraph& g = *chain.graph;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int v = 0; v < g.num_vars(); ++v) {
    std::vector<double> p = gibbs_conditional(g, chain.state, v);
    double u = unit(chain.rng);
    double cum = 0.0;
    int pick = g.num_labels(v) - 1;
    for (int a = 0; a < g.num_labels(v); ++a) {
      cum += p[a];
      if (u < cum) {
        pick = a;
        break;
      }
    }
    chain.state[v] = pick;
  }
  chain.steps_taken += static_cast<std::uint64_t>(g.num_vars());
}

std::vector<Assignment> lsbs_draw(GibbsChain& chain, const LsbsConfig& config, LsbsPhase phase) {
  if (config.n_long < 0 || config.n_short < 0) {
    throw std::invalid_argument("burn-in lengths must be non-negative");
  }
  if (config.n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");

  const int burnin = phase == LsbsPhase::EpochStart ? config.n_long : config.n_short;
  for (int s = 0; s < burnin; ++s) gibbs_sweep(chain);

  std::vector<Assignment> samples;
  samples.reserve(config.n_mc);
  samples.push_back(chain.state);
  for (int k = 1; k < config.n_mc; ++k) {
    gibbs_sweep(chain);
    samples.push_back(chain.state);
  }
  return samples;
}

}  // namespace archmrf
