#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "archmrf/clique_tree.hpp"
#include "archmrf/elimination.hpp"
#include "archmrf/enumerate.hpp"
#include "test_util.hpp"

using namespace archmrf;

namespace {

FactorGraph structure_only(int n, const std::vector<GraphEdge>& edges, int k = 2) {
  std::vector<LabelSet> labels(n, LabelSet::indexed(k));
  std::vector<PairTable> tables(edges.size(), PairTable(k, k));
  return FactorGraph(std::move(labels), {}, edges, std::move(tables));
}

FactorGraph chain_graph(int n) {
  std::vector<GraphEdge> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1});
  return structure_only(n, edges);
}

}  // namespace

TEST_CASE("min-fill triangulation") {
  SUBCASE("chains are already chordal") {
    EliminationOrder eo = triangulate_minfill(chain_graph(4));
    CHECK(eo.fill_edges.empty());
    std::vector<int> sorted = eo.order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3});
  }
  SUBCASE("a 4-cycle needs exactly one chord") {
    FactorGraph cyc = structure_only(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    EliminationOrder eo = triangulate_minfill(cyc);
    CHECK(eo.fill_edges.size() == 1);
  }
  SUBCASE("complete graphs need no fill") {
    FactorGraph k4 = structure_only(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    CHECK(triangulate_minfill(k4).fill_edges.empty());
  }
  SUBCASE("fill edges are disjoint from original edges") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
      FactorGraph g = testutil::random_graph(rng);
      EliminationOrder eo = triangulate_minfill(g);
      for (const GraphEdge& f : eo.fill_edges) CHECK(g.find_edge(f.i, f.j) == -1);
    }
  }
}

TEST_CASE("clique_size") {
  CHECK(clique_size(chain_graph(2)) == 2);
  CHECK(clique_size(chain_graph(9)) == 2);
  CHECK(clique_size(structure_only(3, {{0, 1}, {1, 2}, {0, 2}})) == 3);
  CHECK(clique_size(structure_only(3, {})) == 1);

  SUBCASE("complete graph on n gives n") {
    for (int n : {3, 5, 7}) {
      std::vector<GraphEdge> edges;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
      CHECK(clique_size(structure_only(n, edges)) == n);
    }
  }
  SUBCASE("at least 2 whenever an edge exists") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 20; ++rep) {
      FactorGraph g = testutil::random_graph(rng);
      if (g.num_edges() > 0) CHECK(clique_size(g) >= 2);
    }
  }
}

TEST_CASE("build_clique_tree structures") {
  SUBCASE("chain of 4 gives 3 pairwise cliques in a path") {
    FactorGraph g = chain_graph(4);
    CliqueTree tree = build_clique_tree(g, triangulate_minfill(g));
    REQUIRE(tree.num_cliques() == 3);
    for (const auto& c : tree.cliques) CHECK(c.size() == 2);
    CHECK(tree.tree_edges.size() == 2);
    for (const auto& te : tree.tree_edges) CHECK(te.sepset.size() == 1);
  }
  SUBCASE("chorded 4-cycle gives two triangles sharing a 2-sepset") {
    FactorGraph g = structure_only(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    CliqueTree tree = build_clique_tree(g, triangulate_minfill(g));
    REQUIRE(tree.num_cliques() == 2);
    CHECK(tree.cliques[0].size() == 3);
    CHECK(tree.cliques[1].size() == 3);
    REQUIRE(tree.tree_edges.size() == 1);
    CHECK(tree.tree_edges[0].sepset.size() == 2);
  }
  SUBCASE("single variable") {
    FactorGraph g({LabelSet::indexed(3)}, {}, {}, {});
    CliqueTree tree = build_clique_tree(g, triangulate_minfill(g));
    REQUIRE(tree.num_cliques() == 1);
    CHECK(tree.cliques[0] == std::vector<int>{0});
  }
  SUBCASE("family preservation on random graphs") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 25; ++rep) {
      FactorGraph g = testutil::random_graph(rng);
      CliqueTree tree = build_clique_tree(g, triangulate_minfill(g));
      for (int e = 0; e < g.num_edges(); ++e) {
        const auto& clique = tree.cliques[tree.pairwise_home[e]];
        CHECK(std::binary_search(clique.begin(), clique.end(), g.edge(e).i));
        CHECK(std::binary_search(clique.begin(), clique.end(), g.edge(e).j));
      }
      CHECK(tree.tree_edges.size() == static_cast<std::size_t>(tree.num_cliques() - 1));
    }
  }
}

TEST_CASE("map_clique_tree equals brute force") {
  SUBCASE("two-var chain fixture") {
    ScoredAssignment sol = map_clique_tree(testutil::two_var_chain());
    CHECK(sol.assignment == Assignment{1, 1});
    CHECK(sol.score == doctest::Approx(3.0));
  }
  SUBCASE("all-zero factors take the lexicographically smallest assignment") {
    FactorGraph g = structure_only(5, {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {0, 4}}, 3);
    ScoredAssignment sol = map_clique_tree(g);
    CHECK(sol.assignment == Assignment{0, 0, 0, 0, 0});
    CHECK(sol.score == 0.0);
  }
  SUBCASE("oracle equivalence on random graphs") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 120; ++rep) {
      FactorGraph g = testutil::random_graph(rng);
      ScoredAssignment expected = brute_force_map(g);
      ScoredAssignment got = map_clique_tree(g);
      CHECK(got.score == doctest::Approx(expected.score).epsilon(1e-9));
      CHECK(got.assignment == expected.assignment);
    }
  }
  SUBCASE("constant offsets are carried") {
    FactorGraph fixture = testutil::two_var_chain();
    FactorGraph g(fixture.label_sets(), {{0.0, 1.0}, {0.5, 0.0}}, {{0, 1}},
                  {fixture.pairwise(0)}, -2.25);
    CHECK(map_clique_tree(g).score == doctest::Approx(0.75));
  }
  SUBCASE("table budget is enforced and reported") {
    std::vector<GraphEdge> edges;
    for (int i = 0; i < 9; ++i)
      for (int j = i + 1; j < 9; ++j) edges.push_back({i, j});
    FactorGraph g = structure_only(9, edges, 10);  // one clique of 10^9 entries
    try {
      map_clique_tree(g, 100'000'000);
      FAIL("expected BudgetExceededError");
    } catch (const BudgetExceededError& e) {
      CHECK(e.clique_size == 9);
      CHECK(e.table_entries > 1e8);
    }
  }
}

TEST_CASE("calibration: every clique belief peaks at the MAP score") {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 30; ++rep) {
    FactorGraph g = testutil::random_graph(rng);
    CliqueTree tree = build_clique_tree(g, triangulate_minfill(g));
    MaxSumCalibration cal = calibrate_max_sum(g, tree);
    double map_score = brute_force_map(g).score;
    CHECK(cal.map_score == doctest::Approx(map_score).epsilon(1e-9));
    for (const auto& belief : cal.beliefs) {
      double peak = *std::max_element(belief.begin(), belief.end());
      CHECK(peak == doctest::Approx(map_score).epsilon(1e-9));
    }
  }
}
