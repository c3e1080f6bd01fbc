#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "archmrf/graph_io.hpp"
#include "test_util.hpp"

using namespace archmrf;

namespace {

std::string to_text(const FactorGraph& g, std::optional<ResourceUnit> unit = std::nullopt) {
  std::ostringstream os;
  save_factor_graph(os, g, unit);
  return os.str();
}

FactorGraph from_text(const std::string& text, std::optional<ResourceUnit>* unit = nullptr) {
  std::istringstream is(text);
  return load_factor_graph(is, unit);
}

}  // namespace

TEST_CASE("factor graph text round trip is lossless") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    FactorGraph g = testutil::random_graph(rng);
    std::string first = to_text(g);
    FactorGraph loaded = from_text(first);
    CHECK(to_text(loaded) == first);
    CHECK(loaded.num_vars() == g.num_vars());
    CHECK(loaded.num_edges() == g.num_edges());
    CHECK(log_energy(loaded, Assignment(g.num_vars(), 0)) ==
          log_energy(g, Assignment(g.num_vars(), 0)));
  }
}

TEST_CASE("loader reports line numbers on malformed input") {
  auto line_of = [](const std::string& text) {
    try {
      from_text(text);
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };

  CHECK(line_of("nonsense\n") == 1);
  CHECK(line_of("mrf-graph v1\nvars x\n") == 2);
  CHECK(line_of("mrf-graph v1\nvars 1\nlabels 0: a b\nunary 0: 1\n") == 4);
  CHECK(line_of("mrf-graph v1\nvars 2\nlabels 0: a b\nlabels 1: a b\n"
                "pairwise 0 1:\n0 0\n0 bad\n") == 7);
  CHECK(line_of("mrf-graph v1\nvars 1\nlabels 0: a b\nwhat: 3\n") == 4);
  CHECK(line_of("mrf-graph v1\nvars 2\nlabels 0: a b\nlabels 1: a b\npairwise 0 0:\n") == 5);
  CHECK(line_of("mrf-graph v1\nvars 1\nlabels 0: a b\nunary 0: 0 inf\n") == 4);

  SUBCASE("comments and blank lines are skipped") {
    FactorGraph g = from_text(
        "# a comment\nmrf-graph v1\n\nvars 1\nlabels 0: x y\n# mid comment\nunary 0: 1 2\n");
    CHECK(g.unary(0, 1) == 2.0);
  }
  SUBCASE("missing unary defaults to zeros") {
    FactorGraph g = from_text("mrf-graph v1\nvars 2\nlabels 0: a b\nlabels 1: a b\n");
    CHECK(g.unary(1) == std::vector<double>{0.0, 0.0});
  }
}

TEST_CASE("resource graph files carry a unit") {
  FactorGraph g = testutil::two_var_chain();
  auto dir = std::filesystem::temp_directory_path();
  std::string path = (dir / "archmrf_res_test.fg").string();
  save_resource_graph(path, ResourceGraph{g, ResourceUnit::Macs});
  ResourceGraph rg = load_resource_graph(path);
  CHECK(rg.unit == ResourceUnit::Macs);
  CHECK(rg.graph.num_edges() == 1);

  std::string plain = (dir / "archmrf_plain_test.fg").string();
  save_factor_graph(plain, g);
  CHECK_THROWS(load_resource_graph(plain));
  std::filesystem::remove(path);
  std::filesystem::remove(plain);
}

TEST_CASE("assignment text parsing") {
  CHECK(parse_assignment_text("2,1,0") == Assignment{2, 1, 0});
  CHECK(parse_assignment_text("2 1 0") == Assignment{2, 1, 0});
  CHECK_THROWS_AS(parse_assignment_text("2,x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_assignment_text(""), std::invalid_argument);
}
