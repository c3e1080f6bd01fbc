#include <doctest.h>

#include <cmath>
#include <random>

#include "archmrf/diverse.hpp"
#include "archmrf/enumerate.hpp"
#include "archmrf/learning.hpp"
#include "test_util.hpp"

using namespace archmrf;

namespace {

// central finite difference of E_P[loss] in one unary entry
double fd_unary(const FactorGraph& g, const ObjectiveOracle& oracle, int v, int a, double h) {
  auto at = [&](double d) {
    std::vector<std::vector<double>> unary = g.unaries();
    unary[v][a] += d;
    FactorGraph bumped(g.label_sets(), std::move(unary), g.edges(), g.pairwise_tables(),
                       g.constant());
    return expected_loss_exact(bumped, oracle);
  };
  return (at(h) - at(-h)) / (2 * h);
}

double fd_pairwise(const FactorGraph& g, const ObjectiveOracle& oracle, int e, int a, int b,
                   double h) {
  auto at = [&](double d) {
    std::vector<PairTable> pairwise = g.pairwise_tables();
    pairwise[e].at(a, b) += d;
    FactorGraph bumped(g.label_sets(), g.unaries(), g.edges(), std::move(pairwise), g.constant());
    return expected_loss_exact(bumped, oracle);
  };
  return (at(h) - at(-h)) / (2 * h);
}

void check_close(double got, double expected, double rel = 1e-3) {
  CHECK(std::abs(got - expected) <= rel * std::max(1e-6, std::abs(expected)));
}

FactorGraph chain_skeleton(int n, int k) {
  std::vector<LabelSet> labels(n, LabelSet::indexed(k));
  std::vector<GraphEdge> edges;
  std::vector<PairTable> tables;
  for (int v = 0; v + 1 < n; ++v) {
    edges.push_back({v, v + 1});
    tables.emplace_back(k, k);
  }
  return FactorGraph(std::move(labels), {}, std::move(edges), std::move(tables));
}

}  // namespace

TEST_CASE("aows estimation") {
  FactorGraph skeleton({LabelSet::indexed(2), LabelSet::indexed(3)}, {}, {}, {});

  SUBCASE("negative mean loss per (variable, label)") {
    LossTrace trace;
    trace.records = {{{0, 1}, 1.0}, {{0, 1}, 2.0}, {{0, 1}, 3.0}, {{1, 0}, 4.0}};
    AowsEstimate est = estimate_factors_aows(trace, skeleton);
    CHECK(est.graph.unary(0, 0) == doctest::Approx(-2.0));  // mean{1,2,3}
    CHECK(est.graph.unary(0, 1) == doctest::Approx(-4.0));
    CHECK(est.graph.unary(1, 1) == doctest::Approx(-2.0));
    CHECK(est.graph.unary(1, 0) == doctest::Approx(-4.0));
    CHECK(est.graph.num_edges() == 0);
  }
  SUBCASE("constant loss fills observed entries with -c") {
    LossTrace trace;
    trace.records = {{{0, 0}, 1.5}, {{1, 1}, 1.5}, {{0, 2}, 1.5}};
    AowsEstimate est = estimate_factors_aows(trace, skeleton);
    CHECK(est.graph.unary(0, 0) == doctest::Approx(-1.5));
    CHECK(est.graph.unary(1, 2) == doctest::Approx(-1.5));
  }
  SUBCASE("unseen labels get a pessimistic sentinel and a flag") {
    LossTrace trace;
    trace.records = {{{0, 0}, 1.0}, {{1, 0}, 2.0}};
    AowsEstimate est = estimate_factors_aows(trace, skeleton);
    CHECK(est.any_unobserved);
    CHECK_FALSE(est.observed[1][1]);
    CHECK_FALSE(est.observed[1][2]);
    // only label 0 of variable 1 was ever sampled
    double min_observed = est.graph.unary(1, 0);
    CHECK(est.graph.unary(1, 1) < min_observed - 1.0);
    CHECK(est.graph.unary(1, 2) < min_observed - 1.0);
  }
  SUBCASE("recovers per-variable argmax from uniform sampling") {
    const std::vector<int> cards{3, 4, 2, 3, 4, 2};
    SeparableOracle oracle = make_separable_oracle(cards, 131);
    std::vector<LabelSet> labels;
    for (int k : cards) labels.push_back(LabelSet::indexed(k));
    FactorGraph skel(labels, {}, {}, {});

    std::mt19937_64 rng(137);
    LossTrace trace;
    for (int s = 0; s < 10000; ++s) {
      Assignment a(cards.size());
      for (std::size_t v = 0; v < cards.size(); ++v) {
        a[v] = static_cast<int>(rng() % cards[v]);
      }
      double l = oracle.oracle.loss(a);
      trace.records.push_back({std::move(a), l});
    }
    AowsEstimate est = estimate_factors_aows(trace, skel);
    for (std::size_t v = 0; v < cards.size(); ++v) {
      const std::vector<double>& u = est.graph.unary(static_cast<int>(v));
      int argmax = static_cast<int>(std::max_element(u.begin(), u.end()) - u.begin());
      CHECK(argmax == oracle.optimum[v]);
    }
  }
  CHECK_THROWS_AS(estimate_factors_aows(LossTrace{}, skeleton), std::invalid_argument);
}

TEST_CASE("score-function gradient") {
  SUBCASE("constant loss has zero exact gradient") {
    FactorGraph g = testutil::two_var_chain();
    ObjectiveOracle constant{[](const Assignment&) { return 2.5; }, true};
    FactorGradient grad = grad_expected_loss_exact(g, constant);
    for (const auto& u : grad.unary) {
      for (double x : u) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (const auto& t : grad.pairwise) {
      for (double x : t.values) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
  SUBCASE("matches finite differences on the two-var fixture") {
    FactorGraph g = testutil::two_var_chain();
    ObjectiveOracle sum{[](const Assignment& a) {
                          return static_cast<double>(a[0] + a[1]);
                        },
                        true};
    FactorGradient grad = grad_expected_loss_exact(g, sum);
    const double h = 1e-4;
    for (int v = 0; v < g.num_vars(); ++v) {
      for (int a = 0; a < g.num_labels(v); ++a) {
        check_close(grad.unary[v][a], fd_unary(g, sum, v, a, h));
      }
    }
    for (int e = 0; e < g.num_edges(); ++e) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          check_close(grad.pairwise[e].at(a, b), fd_pairwise(g, sum, e, a, b, h));
        }
      }
    }
  }
  SUBCASE("matches finite differences on random graphs and losses") {
    std::mt19937_64 rng(139);
    testutil::RandomGraphOpts opts;
    opts.max_vars = 4;
    opts.max_labels = 3;
    for (int rep = 0; rep < 5; ++rep) {
      FactorGraph g = testutil::random_graph(rng, opts);
      PairwiseOracle oracle = make_pairwise_oracle(g, 500 + rep);
      FactorGradient grad = grad_expected_loss_exact(g, oracle.oracle);
      const double h = 1e-4;
      for (int v = 0; v < g.num_vars(); ++v) {
        for (int a = 0; a < g.num_labels(v); ++a) {
          check_close(grad.unary[v][a], fd_unary(g, oracle.oracle, v, a, h));
        }
      }
      for (int e = 0; e < g.num_edges(); ++e) {
        for (int a = 0; a < g.pairwise(e).rows; ++a) {
          for (int b = 0; b < g.pairwise(e).cols; ++b) {
            check_close(grad.pairwise[e].at(a, b), fd_pairwise(g, oracle.oracle, e, a, b, h));
          }
        }
      }
    }
  }
  SUBCASE("stochastic estimate within 4 standard errors of exact") {
    std::mt19937_64 rng(149);
    FactorGraph g = testutil::two_var_chain();
    PairwiseOracle oracle = make_pairwise_oracle(g, 151);
    FactorGradient exact = grad_expected_loss_exact(g, oracle.oracle);

    // iid samples straight from the exact distribution
    const std::vector<int> cards = g.cardinalities();
    std::vector<double> probs = exact_distribution(g);
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);
    const int n_samples = 10000;
    std::vector<Assignment> samples;
    std::vector<double> losses;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < n_samples; ++s) {
      double u = unit(rng);
      std::size_t idx = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
      samples.push_back(assignment_at(cards, idx));
      losses.push_back(oracle.oracle.loss(samples.back()));
    }
    FactorGradient est = grad_expected_loss(g, samples, losses);

    double mean_l = 0.0;
    for (double l : losses) mean_l += l;
    mean_l /= n_samples;
    // delta-method standard error of a sample covariance with indicator s
    auto check_entry = [&](double got, double want, auto&& active) {
      double mean_s = 0.0;
      for (int s = 0; s < n_samples; ++s) mean_s += active(samples[s]) ? 1.0 : 0.0;
      mean_s /= n_samples;
      double var_if = 0.0;
      for (int s = 0; s < n_samples; ++s) {
        double infl =
            (losses[s] - mean_l) * ((active(samples[s]) ? 1.0 : 0.0) - mean_s) - got;
        var_if += infl * infl;
      }
      double se = std::sqrt(var_if / n_samples / n_samples);
      CHECK(std::abs(got - want) <= 4 * se + 1e-12);
    };
    for (int v = 0; v < g.num_vars(); ++v) {
      for (int a = 0; a < g.num_labels(v); ++a) {
        check_entry(est.unary[v][a], exact.unary[v][a],
                    [&](const Assignment& x) { return x[v] == a; });
      }
    }
    for (int e = 0; e < g.num_edges(); ++e) {
      const GraphEdge& ed = g.edge(e);
      for (int a = 0; a < g.pairwise(e).rows; ++a) {
        for (int b = 0; b < g.pairwise(e).cols; ++b) {
          check_entry(est.pairwise[e].at(a, b), exact.pairwise[e].at(a, b),
                      [&](const Assignment& x) { return x[ed.i] == a && x[ed.j] == b; });
        }
      }
    }
  }
  SUBCASE("empty sample set rejected") {
    CHECK_THROWS_AS(grad_expected_loss(testutil::two_var_chain(), std::vector<Assignment>{},
                                       std::vector<double>{}),
                    std::invalid_argument);
  }
}

TEST_CASE("learn_factors") {
  FactorGraph skeleton = chain_skeleton(4, 3);

  SUBCASE("zero step size leaves the factors unchanged") {
    SeparableOracle oracle = make_separable_oracle(skeleton.cardinalities(), 157);
    LearnConfig cfg;
    cfg.epochs = 2;
    cfg.iters_per_epoch = 5;
    cfg.lsbs.n_long = 10;
    cfg.lsbs.n_short = 2;
    cfg.step_size = 0.0;
    LearnResult result = learn_factors(skeleton, oracle.oracle, cfg);
    for (int v = 0; v < skeleton.num_vars(); ++v) {
      CHECK(result.graph.unary(v) == skeleton.unary(v));
    }
    CHECK(result.loss_history.size() == 10);
    CHECK(result.trace.records.size() == 10);
  }
  SUBCASE("separable oracle optimum is recovered by MAP") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      SeparableOracle oracle = make_separable_oracle(skeleton.cardinalities(), 160 + seed);
      LearnConfig cfg;
      cfg.epochs = 12;
      cfg.iters_per_epoch = 50;
      cfg.lsbs.n_long = 200;
      cfg.lsbs.n_short = 5;
      cfg.lsbs.n_mc = 12;
      cfg.step_size = 0.05;
      cfg.window = 192;
      cfg.seed = seed;
      LearnResult result = learn_factors(skeleton, oracle.oracle, cfg);
      ScoredAssignment map = brute_force_map(result.graph);
      if (map.assignment == oracle.optimum) ++hits;
    }
    CHECK(hits >= 2);
  }
  SUBCASE("warmup epochs record samples but skip updates") {
    SeparableOracle oracle = make_separable_oracle(skeleton.cardinalities(), 163);
    LearnConfig cfg;
    cfg.epochs = 1;
    cfg.iters_per_epoch = 10;
    cfg.lsbs.n_long = 20;
    cfg.lsbs.n_short = 2;
    cfg.step_size = 0.1;
    cfg.warmup_epochs = 1;
    LearnResult result = learn_factors(skeleton, oracle.oracle, cfg);
    for (int v = 0; v < skeleton.num_vars(); ++v) {
      CHECK(result.graph.unary(v) == skeleton.unary(v));
    }
    CHECK(result.trace.records.size() == 10);
  }
}

TEST_CASE("oracle spec parsing") {
  FactorGraph skeleton = chain_skeleton(3, 2);
  ObjectiveOracle sep = make_oracle_from_spec(skeleton, "separable:7");
  ObjectiveOracle pw = make_oracle_from_spec(skeleton, "pairwise:7:0.5");
  CHECK(std::isfinite(sep.loss({0, 1, 0})));
  CHECK(std::isfinite(pw.loss({1, 0, 1})));
  CHECK_THROWS_AS(make_oracle_from_spec(skeleton, "unknown:1"), std::invalid_argument);
  CHECK_THROWS_AS(make_oracle_from_spec(skeleton, "separable"), std::invalid_argument);
}
