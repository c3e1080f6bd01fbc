#include <doctest.h>

#include <random>

#include "archmrf/enumerate.hpp"
#include "archmrf/mplp.hpp"
#include "test_util.hpp"

using namespace archmrf;

namespace {

FactorGraph three_cycle(const PairTable& t) {
  std::vector<LabelSet> labels(3, LabelSet::indexed(2));
  return FactorGraph(std::move(labels), {}, {{0, 1}, {1, 2}, {0, 2}}, {t, t, t});
}

}  // namespace

TEST_CASE("mplp is exact on trees") {
  SUBCASE("two-var chain fixture") {
    MplpResult r = map_mplp(testutil::two_var_chain());
    CHECK(r.assignment == Assignment{1, 1});
    CHECK(r.primal == doctest::Approx(3.0));
    CHECK(r.dual == doctest::Approx(3.0));
    CHECK(r.converged);
  }
  SUBCASE("random chains") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 40; ++rep) {
      FactorGraph g = testutil::random_chain(rng, 2 + static_cast<int>(rng() % 7), 3);
      MplpResult r = map_mplp(g);
      double expected = brute_force_map(g).score;
      CHECK(r.primal == doctest::Approx(expected).epsilon(1e-7));
      CHECK(r.dual == doctest::Approx(expected).epsilon(1e-7));
      CHECK(certify_gap(r) <= 1e-7);
    }
  }
  SUBCASE("graph without edges") {
    FactorGraph g({LabelSet::indexed(3), LabelSet::indexed(2)}, {{1.0, 3.0, 2.0}, {0.0, -1.0}},
                  {}, {});
    MplpResult r = map_mplp(g);
    CHECK(r.assignment == Assignment{1, 0});
    CHECK(r.primal == doctest::Approx(3.0));
    CHECK(r.dual == doctest::Approx(3.0));
    CHECK(r.iterations == 0);
    CHECK(r.converged);
  }
}

TEST_CASE("agreement 3-cycle is certified") {
  PairTable agree(2, 2);
  agree.at(0, 0) = 1.0;
  agree.at(1, 1) = 1.0;
  MplpResult r = map_mplp(three_cycle(agree));
  CHECK(r.primal == doctest::Approx(3.0));
  CHECK(r.dual == doctest::Approx(3.0));
  CHECK(r.assignment == Assignment{0, 0, 0});  // lexicographic among the two optima
  CHECK(r.converged);
}

TEST_CASE("frustrated 3-cycle stays sound with a positive gap") {
  PairTable disagree(2, 2);
  disagree.at(0, 1) = 1.0;
  disagree.at(1, 0) = 1.0;
  FactorGraph g = three_cycle(disagree);
  CHECK(brute_force_map(g).score == doctest::Approx(2.0));

  MplpResult r = map_mplp(g);
  CHECK(r.dual >= 2.0 - 1e-9);
  CHECK(r.primal <= 2.0 + 1e-9);
  CHECK(certify_gap(r) >= -1e-9);
}

TEST_CASE("mplp soundness and monotone dual on random graphs") {
  std::mt19937_64 rng(59);
  int loopy = 0, loopy_exact = 0;
  for (int rep = 0; rep < 80; ++rep) {
    FactorGraph g = testutil::random_graph(rng);
    MplpResult r = map_mplp(g);
    double exact = brute_force_map(g).score;

    CHECK(r.dual >= exact - 1e-7);
    CHECK(exact >= r.primal - 1e-7);
    for (std::size_t t = 1; t < r.dual_history.size(); ++t) {
      CHECK(r.dual_history[t] <= r.dual_history[t - 1] + 1e-9);
    }
    if (testutil::is_forest(g)) {
      CHECK(certify_gap(r) <= 1e-7);
    } else {
      ++loopy;
      if (certify_gap(r) <= 1e-7) ++loopy_exact;
    }
  }
  if (loopy > 0) {
    MESSAGE("loopy instances solved to certified optimality: ", loopy_exact, "/", loopy);
  }
}

TEST_CASE("mplp argument validation") {
  CHECK_THROWS_AS(map_mplp(testutil::two_var_chain(), 0), std::invalid_argument);
  CHECK_THROWS_AS(map_mplp(testutil::two_var_chain(), 10, 0.0), std::invalid_argument);
}
