#include "archmrf/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "archmrf/enumerate.hpp"
#include "archmrf/graph_io.hpp"
#include "archmrf/mplp.hpp"

namespace archmrf {

namespace {

struct Prober {
  const FactorGraph& perf;
  const ResourceGraph& res;
  const SearchConfig& cfg;
  SearchReport& report;
  double min_resource_seen = std::numeric_limits<double>::infinity();

  ScoredAssignment probe(double gamma, double lo, double hi) {
    FactorGraph combined = combine_lagrangian(perf, res, gamma, cfg.target.value);
    ScoredAssignment sol = solve_map(combined, cfg.diverse.solver, cfg.table_budget);
    ++report.inference_count;

    GammaProbe p;
    p.gamma = gamma;
    p.bracket_lo = lo;
    p.bracket_hi = hi;
    p.combined_score = sol.score;
    p.perf_score = log_energy(perf, sol.assignment);
    p.resource = resource_of(res, sol.assignment);
    p.feasible = p.resource <= cfg.target.value;
    min_resource_seen = std::min(min_resource_seen, p.resource);
    report.probes.push_back(p);
    return sol;
  }

  // Bisection over [lo, hi]; returns true when any midpoint was feasible.
  bool bisect(double lo, double hi) {
    bool feasible_seen = false;
    for (int it = 0; it < cfg.n_iter; ++it) {
      double gamma = 0.5 * (lo + hi);
      probe(gamma, lo, hi);
      if (report.probes.back().feasible) {
        lo = gamma;  // weaken the penalty
        feasible_seen = true;
      } else {
        hi = gamma;  // strengthen the penalty
      }
    }
    return feasible_seen;
  }
};

}  // namespace

SearchReport binary_search_gamma(const FactorGraph& perf, const ResourceGraph& res,
                                 const SearchConfig& cfg) {
  if (cfg.target.unit != res.unit) {
    throw std::invalid_argument("resource target is in " + to_string(cfg.target.unit) +
                                " but the resource model is in " + to_string(res.unit));
  }
  if (cfg.n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
  if (!(cfg.gamma_lo < 0)) throw std::invalid_argument("gamma_lo must be negative");
  if (!perf.same_structure(res.graph)) {
    throw std::invalid_argument("performance and resource graphs differ in variable structure");
  }

  SearchReport report;
  report.config = cfg;
  Prober prober{perf, res, cfg, report};

  bool feasible_seen = prober.bisect(cfg.gamma_lo, 0.0);
  if (!feasible_seen) {
    // the initial bracket never reached feasibility: double gamma_lo outward,
    // starting from gamma_lo itself (the midpoint loop never probes it)
    double g = cfg.gamma_lo;
    double last_infeasible = cfg.gamma_lo;
    for (const GammaProbe& p : report.probes) {
      last_infeasible = std::min(last_infeasible, p.gamma);
    }
    bool found = false;
    for (int d = 0; d <= 20; ++d) {
      prober.probe(g, g, 0.0);
      if (report.probes.back().feasible) {
        found = true;
        break;
      }
      last_infeasible = g;
      g *= 2.0;
    }
    if (!found) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", prober.min_resource_seen);
      throw InfeasibleError("no feasible assignment found after bracket expansion; minimum "
                            "resource seen was " + std::string(buf),
                            prober.min_resource_seen);
    }
    prober.bisect(g, last_infeasible);
  }

  // best feasible gamma: highest performance score, ties toward weaker penalty
  const GammaProbe* best = nullptr;
  for (const GammaProbe& p : report.probes) {
    if (!p.feasible) continue;
    if (!best || p.perf_score > best->perf_score ||
        (p.perf_score == best->perf_score && p.gamma > best->gamma)) {
      best = &p;
    }
  }
  report.final_gamma = best->gamma;

  FactorGraph final_combined = combine_lagrangian(perf, res, report.final_gamma,
                                                  cfg.target.value);
  DiverseSolutionSet diverse = diverse_mbest(final_combined, cfg.diverse);
  report.inference_count += static_cast<int>(diverse.solutions.size());
  for (std::size_t p = 0; p < diverse.solutions.size(); ++p) {
    SearchSolution sol;
    sol.assignment = diverse.solutions[p].assignment;
    sol.perf = log_energy(perf, sol.assignment);
    sol.resource = resource_of(res, sol.assignment);
    sol.feasible = sol.resource <= cfg.target.value;
    sol.duplicate = diverse.duplicate[p];
    report.solutions.push_back(std::move(sol));
  }

  // duality-gap context: exact constrained optimum when enumerable, else the
  // relaxation's own bound
  bool enumerable = true;
  std::uint64_t space = 1;
  for (int k : perf.cardinalities()) {
    if (space > cfg.enumeration_cap / static_cast<std::uint64_t>(k)) {
      enumerable = false;
      break;
    }
    space *= static_cast<std::uint64_t>(k);
  }
  if (enumerable) {
    report.enumerable = true;
    bool any = false;
    for_each_assignment(perf.cardinalities(), [&](const Assignment& a) {
      if (resource_of(res, a) > cfg.target.value) return;
      double s = log_energy(perf, a);
      if (!any || s > report.brute_best_perf) {
        report.brute_best_perf = s;
        report.brute_best = a;
        any = true;
      }
    });
  } else if (cfg.diverse.solver == MapSolver::Mplp) {
    MplpResult r = map_mplp(final_combined);
    ++report.inference_count;
    report.has_dual_bound = true;
    report.dual_bound = r.dual;
  }
  return report;
}

SyntheticInstance synthetic_benchmark(std::uint64_t seed, int n_vars, int k, double edge_prob,
                                      double noise) {
  if (n_vars < 1 || k < 2) throw std::invalid_argument("need n_vars >= 1 and k >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<LabelSet> labels(n_vars, LabelSet::indexed(k));
  std::vector<std::vector<double>> perf_unary(n_vars), res_unary(n_vars);
  for (int v = 0; v < n_vars; ++v) {
    perf_unary[v].resize(k);
    res_unary[v].resize(k);
    for (int a = 0; a < k; ++a) {
      perf_unary[v][a] = gauss(rng);
      res_unary[v][a] = 0.2 + 0.8 * unit(rng);
    }
  }
  std::vector<GraphEdge> edges;
  std::vector<PairTable> perf_pair, res_pair;
  for (int i = 0; i < n_vars; ++i) {
    for (int j = i + 1; j < n_vars; ++j) {
      if (unit(rng) >= edge_prob) continue;
      edges.push_back({i, j});
      PairTable tp(k, k), tr(k, k);
      for (double& x : tp.values) x = noise * gauss(rng);
      for (double& x : tr.values) x = noise * unit(rng);
      perf_pair.push_back(std::move(tp));
      res_pair.push_back(std::move(tr));
    }
  }

  SyntheticInstance inst;
  inst.perf = FactorGraph(labels, std::move(perf_unary), edges, std::move(perf_pair));
  inst.res = ResourceGraph{
      FactorGraph(labels, std::move(res_unary), edges, std::move(res_pair)),
      ResourceUnit::Milliseconds};

  // brute-force ground truth at three resource percentiles
  std::vector<double> resources;
  for_each_assignment(inst.perf.cardinalities(),
                      [&](const Assignment& a) { resources.push_back(resource_of(inst.res, a)); });
  std::vector<double> sorted = resources;
  std::sort(sorted.begin(), sorted.end());
  inst.min_resource = sorted.front();
  inst.max_resource = sorted.back();

  for (double pct : {25.0, 50.0, 75.0}) {
    SyntheticGroundTruth gt;
    gt.percentile = pct;
    std::size_t rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * sorted.size()));
    rank = std::min(std::max<std::size_t>(rank, 1), sorted.size());
    gt.target = sorted[rank - 1];
    bool any = false;
    for_each_assignment(inst.perf.cardinalities(), [&](const Assignment& a) {
      if (resource_of(inst.res, a) > gt.target) return;
      double s = log_energy(inst.perf, a);
      if (!any || s > gt.best_perf) {
        gt.best_perf = s;
        gt.best = a;
        any = true;
      }
    });
    inst.ground_truth.push_back(std::move(gt));
  }
  return inst;
}

PipelineResult run_pipeline(const FactorGraph& skeleton, const ObjectiveOracle& oracle,
                            const ResourceGraph& res, const PipelineConfig& config) {
  PipelineResult result;
  LearnResult learned = learn_factors(skeleton, oracle, config.learn);
  result.learned = std::move(learned.graph);
  result.loss_history = std::move(learned.loss_history);
  result.report = binary_search_gamma(result.learned, res, config.search);
  return result;
}

PipelineResult run_pipeline(const Template& t, const ObjectiveOracle& oracle,
                            const PipelineConfig& config) {
  FactorGraph skeleton = to_factor_graph_skeleton(t);
  ResourceGraph res = flops_pairwise(t);
  if (config.search.target.unit != res.unit) {
    throw std::invalid_argument("template pipelines use a FLOPs resource model; the target must "
                                "be in macs");
  }
  PipelineResult result = run_pipeline(skeleton, oracle, res, config);
  for (const SearchSolution& sol : result.report.solutions) {
    result.decoded.push_back(decode(t, sol.assignment));
  }
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_search_report(std::ostream& os, const SearchReport& r) {
  os << "search-report v1\n";
  os << "unit " << to_string(r.config.target.unit) << "\n";
  os << "target " << fmt(r.config.target.value) << "\n";
  os << "n_iter " << r.config.n_iter << "\n";
  os << "m " << r.config.diverse.m << "\n";
  os << "L " << fmt(r.config.diverse.L) << "\n";
  os << "solver " << to_string(r.config.diverse.solver) << "\n";
  os << "gamma_lo " << fmt(r.config.gamma_lo) << "\n";
  os << "enumeration_cap " << r.config.enumeration_cap << "\n";
  os << "table_budget " << r.config.table_budget << "\n";
  os << "final_gamma " << fmt(r.final_gamma) << "\n";
  os << "inference_count " << r.inference_count << "\n";
  if (r.enumerable) {
    os << "brute_best_perf " << fmt(r.brute_best_perf) << "\n";
    os << "brute_best";
    for (int a : r.brute_best) os << " " << a;
    os << "\n";
  }
  if (r.has_dual_bound) os << "dual_bound " << fmt(r.dual_bound) << "\n";
  os << "probes " << r.probes.size() << "\n";
  for (const GammaProbe& p : r.probes) {
    os << fmt(p.gamma) << " " << fmt(p.bracket_lo) << " " << fmt(p.bracket_hi) << " "
       << fmt(p.combined_score) << " " << fmt(p.perf_score) << " " << fmt(p.resource) << " "
       << (p.feasible ? 1 : 0) << "\n";
  }
  os << "solutions " << r.solutions.size() << "\n";
  for (const SearchSolution& s : r.solutions) {
    os << (s.feasible ? 1 : 0) << " " << (s.duplicate ? 1 : 0) << " " << fmt(s.perf) << " "
       << fmt(s.resource);
    for (int a : s.assignment) os << " " << a;
    os << "\n";
  }
}

void save_search_report(const std::string& path, const SearchReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_search_report(os, report);
}

SearchReport load_search_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");

  SearchReport r;
  std::string line;
  int line_no = 0;
  auto next = [&]() {
    if (!std::getline(is, line)) throw ParseError("unexpected end of report", line_no + 1);
    ++line_no;
    return std::istringstream(line);
  };

  {
    auto iss = next();
    std::string magic, version;
    iss >> magic >> version;
    if (magic != "search-report" || version != "v1") {
      throw ParseError("expected 'search-report v1' header", line_no);
    }
  }

  auto expect_key = [&](std::istringstream& iss, const std::string& key) {
    std::string k;
    iss >> k;
    if (k != key) throw ParseError("expected '" + key + "', got '" + k + "'", line_no);
  };

  std::string tok;
  {
    auto iss = next();
    expect_key(iss, "unit");
    iss >> tok;
    r.config.target.unit = resource_unit_from_string(tok);
  }
  {
    auto iss = next();
    expect_key(iss, "target");
    iss >> r.config.target.value;
  }
  {
    auto iss = next();
    expect_key(iss, "n_iter");
    iss >> r.config.n_iter;
  }
  {
    auto iss = next();
    expect_key(iss, "m");
    iss >> r.config.diverse.m;
  }
  {
    auto iss = next();
    expect_key(iss, "L");
    iss >> r.config.diverse.L;
  }
  {
    auto iss = next();
    expect_key(iss, "solver");
    iss >> tok;
    r.config.diverse.solver = map_solver_from_string(tok);
  }
  {
    auto iss = next();
    expect_key(iss, "gamma_lo");
    iss >> r.config.gamma_lo;
  }
  {
    auto iss = next();
    expect_key(iss, "enumeration_cap");
    iss >> r.config.enumeration_cap;
  }
  {
    auto iss = next();
    expect_key(iss, "table_budget");
    iss >> r.config.table_budget;
  }
  {
    auto iss = next();
    expect_key(iss, "final_gamma");
    iss >> r.final_gamma;
  }
  {
    auto iss = next();
    expect_key(iss, "inference_count");
    iss >> r.inference_count;
  }

  auto iss = next();
  std::string key;
  iss >> key;
  if (key == "brute_best_perf") {
    r.enumerable = true;
    iss >> r.brute_best_perf;
    auto iss2 = next();
    expect_key(iss2, "brute_best");
    int a;
    while (iss2 >> a) r.brute_best.push_back(a);
    iss = next();
    iss >> key;
  }
  if (key == "dual_bound") {
    r.has_dual_bound = true;
    iss >> r.dual_bound;
    iss = next();
    iss >> key;
  }

  if (key != "probes") throw ParseError("expected 'probes N'", line_no);
  std::size_t n_probes = 0;
  iss >> n_probes;
  for (std::size_t i = 0; i < n_probes; ++i) {
    auto row = next();
    GammaProbe p;
    int feas;
    row >> p.gamma >> p.bracket_lo >> p.bracket_hi >> p.combined_score >> p.perf_score >>
        p.resource >> feas;
    if (row.fail()) throw ParseError("bad probe row", line_no);
    p.feasible = feas != 0;
    r.probes.push_back(p);
  }

  {
    auto hdr = next();
    expect_key(hdr, "solutions");
    std::size_t n_solutions = 0;
    hdr >> n_solutions;
    for (std::size_t i = 0; i < n_solutions; ++i) {
      auto row = next();
      SearchSolution s;
      int feas, dup;
      row >> feas >> dup >> s.perf >> s.resource;
      if (row.fail()) throw ParseError("bad solution row", line_no);
      s.feasible = feas != 0;
      s.duplicate = dup != 0;
      int a;
      while (row >> a) s.assignment.push_back(a);
      r.solutions.push_back(std::move(s));
    }
  }
  return r;
}

}  // namespace archmrf
