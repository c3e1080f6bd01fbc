#include "archmrf/learning.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

namespace archmrf {

AowsEstimate estimate_factors_aows(const LossTrace& trace, const FactorGraph& skeleton) {
  if (trace.records.empty()) throw std::invalid_argument("loss trace is empty");

  const int n = skeleton.num_vars();
  std::vector<std::vector<double>> sum(n);
  std::vector<std::vector<long>> count(n);
  for (int v = 0; v < n; ++v) {
    sum[v].assign(skeleton.num_labels(v), 0.0);
    count[v].assign(skeleton.num_labels(v), 0);
  }
  for (const LossRecord& rec : trace.records) {
    validate_assignment(skeleton, rec.assignment);
    if (!std::isfinite(rec.loss)) throw std::invalid_argument("non-finite loss in trace");
    for (int v = 0; v < n; ++v) {
      sum[v][rec.assignment[v]] += rec.loss;
      count[v][rec.assignment[v]] += 1;
    }
  }

  AowsEstimate est;
  est.observed.resize(n);
  std::vector<std::vector<double>> unary(n);
  for (int v = 0; v < n; ++v) {
    unary[v].assign(skeleton.num_labels(v), 0.0);
    est.observed[v].assign(skeleton.num_labels(v), false);
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (int a = 0; a < skeleton.num_labels(v); ++a) {
      if (count[v][a] == 0) continue;
      double value = -sum[v][a] / static_cast<double>(count[v][a]);
      unary[v][a] = value;
      est.observed[v][a] = true;
      lo = any ? std::min(lo, value) : value;
      hi = any ? std::max(hi, value) : value;
      any = true;
    }
    // labels never sampled get a pessimistic sentinel well below the observed range
    const double sentinel = lo - 10.0 * (1.0 + (hi - lo));
    for (int a = 0; a < skeleton.num_labels(v); ++a) {
      if (!est.observed[v][a]) {
        unary[v][a] = sentinel;
        est.any_unobserved = true;
      }
    }
  }
  est.graph = FactorGraph(skeleton.label_sets(), std::move(unary), {}, {});
  return est;
}

namespace {

FactorGradient zero_gradient(const FactorGraph& g) {
  FactorGradient grad;
  grad.unary.resize(g.num_vars());
  for (int v = 0; v < g.num_vars(); ++v) grad.unary[v].assign(g.num_labels(v), 0.0);
  grad.pairwise.reserve(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    grad.pairwise.emplace_back(g.pairwise(e).rows, g.pairwise(e).cols);
  }
  return grad;
}

}  // namespace

FactorGradient grad_expected_loss(const FactorGraph& g, const std::vector<Assignment>& samples,
                                  const std::vector<double>& losses) {
  if (samples.empty()) throw std::invalid_argument("gradient estimate needs at least one sample");
  if (samples.size() != losses.size()) {
    throw std::invalid_argument("samples and losses differ in length");
  }

  const double inv_n = 1.0 / static_cast<double>(samples.size());
  double mean_loss = 0.0;
  for (double l : losses) mean_loss += l;
  mean_loss *= inv_n;

  // accumulate E[l * s] and E[s] per entry, then take the covariance
  FactorGradient ls = zero_gradient(g);
  FactorGradient s = zero_gradient(g);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Assignment& a = samples[k];
    validate_assignment(g, a);
    for (int v = 0; v < g.num_vars(); ++v) {
      ls.unary[v][a[v]] += losses[k];
      s.unary[v][a[v]] += 1.0;
    }
    for (int e = 0; e < g.num_edges(); ++e) {
      const GraphEdge& ed = g.edge(e);
      ls.pairwise[e].at(a[ed.i], a[ed.j]) += losses[k];
      s.pairwise[e].at(a[ed.i], a[ed.j]) += 1.0;
    }
  }

  FactorGradient grad = zero_gradient(g);
  for (int v = 0; v < g.num_vars(); ++v) {
    for (int a = 0; a < g.num_labels(v); ++a) {
      grad.unary[v][a] = inv_n * ls.unary[v][a] - mean_loss * inv_n * s.unary[v][a];
    }
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    for (std::size_t k = 0; k < grad.pairwise[e].values.size(); ++k) {
      grad.pairwise[e].values[k] =
          inv_n * ls.pairwise[e].values[k] - mean_loss * inv_n * s.pairwise[e].values[k];
    }
  }
  return grad;
}

FactorGradient grad_expected_loss(const FactorGraph& g, const ObjectiveOracle& oracle,
                                  const std::vector<Assignment>& samples) {
  std::vector<double> losses;
  losses.reserve(samples.size());
  for (const Assignment& a : samples) losses.push_back(oracle.loss(a));
  return grad_expected_loss(g, samples, losses);
}

FactorGradient grad_expected_loss_exact(const FactorGraph& g, const ObjectiveOracle& oracle,
                                        std::uint64_t max_space) {
  const std::vector<int> cards = g.cardinalities();
  const std::vector<double> probs = exact_distribution(g, max_space);

  FactorGradient ls = zero_gradient(g);
  FactorGradient s = zero_gradient(g);
  double mean_loss = 0.0;
  std::uint64_t idx = 0;
  for_each_assignment(cards, [&](const Assignment& a) {
    const double p = probs[idx++];
    const double l = oracle.loss(a);
    mean_loss += p * l;
    for (int v = 0; v < g.num_vars(); ++v) {
      ls.unary[v][a[v]] += p * l;
      s.unary[v][a[v]] += p;
    }
    for (int e = 0; e < g.num_edges(); ++e) {
      const GraphEdge& ed = g.edge(e);
      ls.pairwise[e].at(a[ed.i], a[ed.j]) += p * l;
      s.pairwise[e].at(a[ed.i], a[ed.j]) += p;
    }
  });

  FactorGradient grad = zero_gradient(g);
  for (int v = 0; v < g.num_vars(); ++v) {
    for (int a = 0; a < g.num_labels(v); ++a) {
      grad.unary[v][a] = ls.unary[v][a] - mean_loss * s.unary[v][a];
    }
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    for (std::size_t k = 0; k < grad.pairwise[e].values.size(); ++k) {
      grad.pairwise[e].values[k] =
          ls.pairwise[e].values[k] - mean_loss * s.pairwise[e].values[k];
    }
  }
  return grad;
}

double expected_loss_exact(const FactorGraph& g, const ObjectiveOracle& oracle,
                           std::uint64_t max_space) {
  const std::vector<double> probs = exact_distribution(g, max_space);
  double mean = 0.0;
  std::uint64_t idx = 0;
  for_each_assignment(g.cardinalities(),
                      [&](const Assignment& a) { mean += probs[idx++] * oracle.loss(a); });
  return mean;
}

namespace {

FactorGraph apply_gradient_step(const FactorGraph& g, const FactorGradient& grad, double scale) {
  std::vector<std::vector<double>> unary = g.unaries();
  std::vector<PairTable> pairwise = g.pairwise_tables();
  for (int v = 0; v < g.num_vars(); ++v) {
    for (int a = 0; a < g.num_labels(v); ++a) unary[v][a] += scale * grad.unary[v][a];
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    for (std::size_t k = 0; k < pairwise[e].values.size(); ++k) {
      pairwise[e].values[k] += scale * grad.pairwise[e].values[k];
    }
  }
  return FactorGraph(g.label_sets(), std::move(unary), g.edges(), std::move(pairwise),
                     g.constant());
}

}  // namespace

LearnResult learn_factors(const FactorGraph& skeleton, const ObjectiveOracle& oracle,
                          const LearnConfig& config) {
  if (config.epochs < 0 || config.iters_per_epoch < 0) {
    throw std::invalid_argument("epoch and iteration counts must be non-negative");
  }
  if (!(config.step_size >= 0)) throw std::invalid_argument("step size must be non-negative");
  if (config.window < 1) throw std::invalid_argument("gradient window must be >= 1");

  LearnResult result;
  result.graph = skeleton;
  GibbsChain chain(result.graph, config.seed);

  std::deque<LossRecord> window;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    lsbs_draw(chain, config.lsbs, LsbsPhase::EpochStart);
    for (int it = 0; it < config.iters_per_epoch; ++it) {
      std::vector<Assignment> samples = lsbs_draw(chain, config.lsbs, LsbsPhase::Iteration);

      double batch_mean = 0.0;
      for (Assignment& a : samples) {
        double l = oracle.loss(a);
        if (!std::isfinite(l)) throw std::runtime_error("objective oracle returned a non-finite loss");
        batch_mean += l;
        result.trace.records.push_back({a, l});
        window.push_back({std::move(a), l});
        while (static_cast<int>(window.size()) > config.window) window.pop_front();
      }
      result.loss_history.push_back(batch_mean / static_cast<double>(samples.size()));

      if (epoch < config.warmup_epochs || config.step_size == 0.0) continue;
      if (window.size() < 2) continue;  // covariance needs at least two samples

      std::vector<Assignment> batch;
      std::vector<double> losses;
      batch.reserve(window.size());
      losses.reserve(window.size());
      for (const LossRecord& rec : window) {
        batch.push_back(rec.assignment);
        losses.push_back(rec.loss);
      }
      FactorGradient grad = grad_expected_loss(result.graph, batch, losses);
      result.graph = apply_gradient_step(result.graph, grad, -config.step_size);
      chain.rebind(result.graph);
    }
  }
  result.total_sweeps = chain.steps_taken / std::max(1, skeleton.num_vars());
  return result;
}

SeparableOracle make_separable_oracle(const std::vector<int>& cards, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SeparableOracle out;
  out.costs.resize(cards.size());
  out.optimum.resize(cards.size());
  for (std::size_t v = 0; v < cards.size(); ++v) {
    out.costs[v].resize(cards[v]);
    for (int a = 0; a < cards[v]; ++a) {
      // the tiny index-proportional term breaks exact ties deterministically
      out.costs[v][a] = unit(rng) + a * 1e-9;
    }
    out.optimum[v] = static_cast<int>(
        std::min_element(out.costs[v].begin(), out.costs[v].end()) - out.costs[v].begin());
  }
  std::vector<std::vector<double>> costs = out.costs;
  out.oracle.loss = [costs](const Assignment& a) {
    double total = 0.0;
    for (std::size_t v = 0; v < costs.size(); ++v) total += costs[v][a[v]];
    return total;
  };
  return out;
}

PairwiseOracle make_pairwise_oracle(const FactorGraph& skeleton, std::uint64_t seed,
                                    double coupling) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::vector<double>> unary(skeleton.num_vars());
  for (int v = 0; v < skeleton.num_vars(); ++v) {
    unary[v].resize(skeleton.num_labels(v));
    for (double& x : unary[v]) x = gauss(rng);
  }
  std::vector<PairTable> pairwise = skeleton.pairwise_tables();
  for (PairTable& t : pairwise) {
    for (double& x : t.values) x = coupling * gauss(rng);
  }

  PairwiseOracle out;
  out.hidden = FactorGraph(skeleton.label_sets(), std::move(unary), skeleton.edges(),
                           std::move(pairwise));
  FactorGraph hidden = out.hidden;
  out.oracle.loss = [hidden](const Assignment& a) { return -log_energy(hidden, a); };
  return out;
}

ObjectiveOracle make_oracle_from_spec(const FactorGraph& skeleton, const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw std::invalid_argument("empty oracle spec");

  auto parse_seed = [&](std::size_t idx) -> std::uint64_t {
    if (parts.size() <= idx) throw std::invalid_argument("oracle spec '" + spec + "' needs a seed");
    return std::stoull(parts[idx]);
  };

  if (parts[0] == "separable") {
    return make_separable_oracle(skeleton.cardinalities(), parse_seed(1)).oracle;
  }
  if (parts[0] == "pairwise") {
    double coupling = parts.size() > 2 ? std::stod(parts[2]) : 1.0;
    return make_pairwise_oracle(skeleton, parse_seed(1), coupling).oracle;
  }
  throw std::invalid_argument("unknown oracle spec '" + spec +
                              "' (expected separable:SEED or pairwise:SEED[:COUPLING])");
}

}  // namespace archmrf
