#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "archmrf/enumerate.hpp"
#include "archmrf/resource_model.hpp"
#include "test_util.hpp"

using namespace archmrf;

namespace {

// single conv node fed by the network input
Template single_conv(int in_channels, int base, int hw, std::vector<ArchLabel> labels) {
  Template t;
  t.backbone = "toy";
  t.in_channels = in_channels;
  t.in_h = t.in_w = hw;
  TemplateNode n;
  n.op = OpType::Normal;
  n.base_channels = base;
  n.out_h = n.out_w = hw;
  n.labels = std::move(labels);
  n.name = "conv0";
  t.nodes.push_back(std::move(n));
  return t;
}

Template toy_chain(int layers, int in_channels = 2, int base = 8, int hw = 4) {
  Template t;
  t.backbone = "toy";
  t.in_channels = in_channels;
  t.in_h = t.in_w = hw;
  for (int i = 0; i < layers; ++i) {
    TemplateNode n;
    n.op = OpType::Normal;
    n.base_channels = base;
    n.out_h = n.out_w = hw;
    n.labels = {{3, 0.5}, {3, 1.0}, {5, 1.0}};
    n.name = "n" + std::to_string(i);
    t.nodes.push_back(std::move(n));
    if (i > 0) t.edges.push_back({i - 1, i});
  }
  return t;
}

}  // namespace

TEST_CASE("flops_pairwise basics") {
  SUBCASE("single conv MAC count") {
    Template t = single_conv(16, 32, 8, {{3, 1.0}});
    ResourceGraph model = flops_pairwise(t);
    CHECK(model.unit == ResourceUnit::Macs);
    CHECK(resource_of(model, {0}) == doctest::Approx(294912.0));  // 9*16*32*64
  }
  SUBCASE("interior layers scale quadratically with width") {
    Template t = toy_chain(3);
    ResourceGraph model = flops_pairwise(t);
    // middle layer at width 0.5 vs 1.0 with both neighbors fixed:
    // its two incident contributions scale by 0.5 each only where it appears
    Assignment full{1, 1, 1}, half{1, 0, 1};
    NetConfig cf = decode(t, full);
    NetConfig ch = decode(t, half);
    std::uint64_t mid_full = static_cast<std::uint64_t>(9) * cf.layers[1].in_channels *
                             cf.layers[1].out_channels * 16;
    std::uint64_t mid_half = static_cast<std::uint64_t>(9) * ch.layers[1].in_channels *
                             ch.layers[1].out_channels * 16;
    CHECK(mid_half * 2 == mid_full);  // out side halves; in side unchanged here
    CHECK(resource_of(model, full) == doctest::Approx(mac_count_direct(t, full)));
    CHECK(resource_of(model, half) == doctest::Approx(mac_count_direct(t, half)));
  }
  SUBCASE("pairwise sum equals the direct count for every assignment") {
    Template t = toy_chain(4);
    ResourceGraph model = flops_pairwise(t);
    std::vector<int> cards;
    for (const TemplateNode& n : t.nodes) cards.push_back(static_cast<int>(n.labels.size()));
    for_each_assignment(cards, [&](const Assignment& a) {
      std::uint64_t direct = mac_count_direct(t, a);
      std::uint64_t pairwise = static_cast<std::uint64_t>(resource_of(model, a));
      CHECK(direct == pairwise);
      CHECK(static_cast<double>(direct) == resource_of(model, a));  // bit-exact in doubles
    });
  }
  SUBCASE("concatenation split stays exact on a real unet") {
    Template t = build_unet_template(2, 8, 3, 16, 16);
    ResourceGraph model = flops_pairwise(t);
    std::mt19937_64 rng(79);
    for (int rep = 0; rep < 200; ++rep) {
      Assignment a(t.num_nodes());
      for (int v = 0; v < t.num_nodes(); ++v) {
        a[v] = static_cast<int>(rng() % t.nodes[v].labels.size());
      }
      CHECK(static_cast<std::uint64_t>(resource_of(model, a)) == mac_count_direct(t, a));
    }
  }
  SUBCASE("missing channel metadata is rejected") {
    Template t = toy_chain(2);
    t.nodes[1].base_channels = 0;
    CHECK_THROWS_AS(flops_pairwise(t), std::invalid_argument);
  }
}

TEST_CASE("resource_of") {
  Template t = toy_chain(3);
  FactorGraph skeleton = to_factor_graph_skeleton(t);
  ResourceGraph zero{skeleton, ResourceUnit::Milliseconds};
  CHECK(resource_of(zero, {0, 0, 0}) == 0.0);
}

TEST_CASE("generate_profiles") {
  Template t = toy_chain(3);
  ResourceGraph hidden = random_latency_model(t, 83);

  SUBCASE("zero sigma reproduces the hidden totals") {
    auto samples = generate_profiles(t, hidden, 0.0, 50, 7);
    for (const ProfilingSample& s : samples) {
      CHECK(s.measured == resource_of(hidden, s.assignment));
    }
  }
  SUBCASE("deterministic per seed") {
    auto a = generate_profiles(t, hidden, 0.3, 40, 11);
    auto b = generate_profiles(t, hidden, 0.3, 40, 11);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].assignment == b[i].assignment);
      CHECK(a[i].measured == b[i].measured);
    }
  }
  SUBCASE("assignments are uniform per label") {
    const int count = 1000;
    auto samples = generate_profiles(t, hidden, 0.0, count, 13);
    for (int v = 0; v < t.num_nodes(); ++v) {
      const int k = static_cast<int>(t.nodes[v].labels.size());
      std::vector<int> freq(k, 0);
      for (const ProfilingSample& s : samples) ++freq[s.assignment[v]];
      for (int a = 0; a < k; ++a) {
        CHECK(std::abs(freq[a] / static_cast<double>(count) - 1.0 / k) < 0.05);
      }
    }
  }
  CHECK_THROWS_AS(generate_profiles(t, hidden, 0.0, 0, 1), std::invalid_argument);
}

TEST_CASE("fit_latency") {
  Template t = toy_chain(3);
  ResourceGraph hidden = random_latency_model(t, 89);

  SUBCASE("noiseless covering design reproduces the hidden totals") {
    // every assignment of the toy space: rank-sufficient for predictions
    std::vector<int> cards;
    for (const TemplateNode& n : t.nodes) cards.push_back(static_cast<int>(n.labels.size()));
    std::vector<ProfilingSample> samples;
    for_each_assignment(cards, [&](const Assignment& a) {
      samples.push_back({a, resource_of(hidden, a)});
    });
    LatencyFit fit = fit_latency(t, samples);
    CHECK(fit.residual_rms <= 1e-8);
    CHECK(fit.model.unit == ResourceUnit::Milliseconds);
    for (const ProfilingSample& s : samples) {
      CHECK(resource_of(fit.model, s.assignment) ==
            doctest::Approx(s.measured).epsilon(1e-9));
    }
    // pairwise-only design: shifts along edges make raw entries non-unique
    CHECK(fit.rank_deficient);
  }
  SUBCASE("all-zero measurements give a zero predictor") {
    auto samples = generate_profiles(t, hidden, 0.0, 30, 17);
    for (ProfilingSample& s : samples) s.measured = 0.0;
    LatencyFit fit = fit_latency(t, samples);
    CHECK(fit.residual_rms <= 1e-12);
    for (const ProfilingSample& s : samples) {
      CHECK(resource_of(fit.model, s.assignment) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
  SUBCASE("noisy fit predicts held-out samples within 2 sigma") {
    const double sigma = 0.05;
    double total_rmse = 0.0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
      ResourceGraph truth = random_latency_model(t, 1000 + seed);
      auto train = generate_profiles(t, truth, sigma, 400, 50 + seed);
      auto held = generate_profiles(t, truth, 0.0, 100, 5000 + seed);
      LatencyFit fit = fit_latency(t, train);
      double se = 0.0;
      for (const ProfilingSample& s : held) {
        double err = resource_of(fit.model, s.assignment) - s.measured;
        se += err * err;
      }
      total_rmse += std::sqrt(se / held.size());
    }
    CHECK(total_rmse / seeds <= 2 * sigma);
  }
  CHECK_THROWS_AS(fit_latency(t, {}), std::invalid_argument);
}

TEST_CASE("profile files round trip") {
  Template t = toy_chain(3);
  ResourceGraph hidden = random_latency_model(t, 97);
  ProfileFile file;
  file.unit = ResourceUnit::Milliseconds;
  for (const TemplateNode& n : t.nodes) file.var_names.push_back(n.name);
  file.samples = generate_profiles(t, hidden, 0.25, 25, 3);

  auto path = (std::filesystem::temp_directory_path() / "archmrf_profiles_test.txt").string();
  save_profiles(path, file);
  ProfileFile loaded = load_profiles(path);
  CHECK(loaded.unit == file.unit);
  CHECK(loaded.var_names == file.var_names);
  REQUIRE(loaded.samples.size() == file.samples.size());
  for (std::size_t i = 0; i < file.samples.size(); ++i) {
    CHECK(loaded.samples[i].assignment == file.samples[i].assignment);
    CHECK(loaded.samples[i].measured == file.samples[i].measured);
  }
  std::filesystem::remove(path);
}
