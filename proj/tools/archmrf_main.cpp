// Command-line front end: MAP solving, diverse M-best, resource-constrained
// search, latency fitting, Gibbs sampling, factor learning and search-space
// inspection over factor-graph text files.
//
// Exit codes: 0 success, 2 infeasible search, 3 input error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "archmrf/arch_template.hpp"
#include "archmrf/clique_tree.hpp"
#include "archmrf/diverse.hpp"
#include "archmrf/elimination.hpp"
#include "archmrf/enumerate.hpp"
#include "archmrf/gibbs.hpp"
#include "archmrf/graph_io.hpp"
#include "archmrf/learning.hpp"
#include "archmrf/mplp.hpp"
#include "archmrf/resource_model.hpp"
#include "archmrf/search.hpp"

namespace {

using namespace archmrf;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitInputError = 3;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// "backbone[:key=val,...]" with keys depth, width, channels, size.
Template parse_template_spec(const std::string& spec) {
  std::string backbone = spec;
  std::string params;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    backbone = spec.substr(0, pos);
    params = spec.substr(pos + 1);
  }
  int depth = 5, width = 64, channels = 3, size = 256;
  std::stringstream ss(params);
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    if (kv.empty()) continue;
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad template option '" + kv + "'");
    std::string key = kv.substr(0, eq);
    int value = std::stoi(kv.substr(eq + 1));
    if (key == "depth") depth = value;
    else if (key == "width") width = value;
    else if (key == "channels") channels = value;
    else if (key == "size") size = value;
    else throw std::invalid_argument("unknown template option '" + key + "'");
  }
  if (backbone == "unet") return build_unet_template(depth, width, channels, size, size);
  if (backbone == "unet+") return build_unet_plus_template(depth, width, channels, size, size);
  if (backbone == "unet++") {
    return build_unet_plusplus_template(depth, width, channels, size, size);
  }
  throw std::invalid_argument("unknown backbone '" + backbone + "' (expected unet|unet+|unet++)");
}

std::ostream& open_sink(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  return file;
}

struct CommonArgs {
  std::uint64_t seed = 0;
};

int cmd_solve_map(const std::string& graph_path, const std::string& algo,
                  std::uint64_t table_budget, const std::string& out_path) {
  FactorGraph g = load_factor_graph(graph_path);
  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);

  os << "map-solution v1\n";
  os << "algo " << algo << "\n";
  if (map_solver_from_string(algo) == MapSolver::Exact) {
    ScoredAssignment sol = map_clique_tree(g, table_budget);
    os << "score " << fmt(sol.score) << "\n";
    os << "assignment";
    for (int a : sol.assignment) os << " " << a;
    os << "\n";
  } else {
    MplpResult r = map_mplp(g);
    os << "score " << fmt(r.primal) << "\n";
    os << "assignment";
    for (int a : r.assignment) os << " " << a;
    os << "\n";
    os << "dual " << fmt(r.dual) << "\n";
    os << "gap " << fmt(certify_gap(r)) << "\n";
    os << "iterations " << r.iterations << "\n";
    os << "converged " << (r.converged ? 1 : 0) << "\n";
  }
  return kExitOk;
}

int cmd_diverse(const std::string& graph_path, int m, double L, const std::string& algo,
                const std::string& out_path) {
  FactorGraph g = load_factor_graph(graph_path);
  DiverseConfig cfg;
  cfg.m = m;
  cfg.L = L;
  cfg.solver = map_solver_from_string(algo);
  DiverseSolutionSet set = diverse_mbest(g, cfg);

  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);
  os << "diverse-solutions v1\n";
  os << "m " << m << "\n";
  os << "L " << fmt(L) << "\n";
  os << "algo " << algo << "\n";
  os << "# rank score duplicate labels...\n";
  for (std::size_t p = 0; p < set.solutions.size(); ++p) {
    os << (p + 1) << " " << fmt(set.solutions[p].score) << " " << (set.duplicate[p] ? 1 : 0);
    for (int a : set.solutions[p].assignment) os << " " << a;
    os << "\n";
  }
  return kExitOk;
}

int cmd_search(const std::string& perf_path, const std::string& res_path, double target,
               const std::string& unit, int iters, int m, double L, const std::string& algo,
               double gamma_lo, const std::string& out_path) {
  FactorGraph perf = load_factor_graph(perf_path);
  ResourceGraph res = load_resource_graph(res_path);

  SearchConfig cfg;
  cfg.target.value = target;
  cfg.target.unit = unit.empty() ? res.unit : resource_unit_from_string(unit);
  cfg.n_iter = iters;
  cfg.diverse.m = m;
  cfg.diverse.L = L;
  cfg.diverse.solver = map_solver_from_string(algo);
  cfg.gamma_lo = gamma_lo;

  SearchReport report = binary_search_gamma(perf, res, cfg);
  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);
  save_search_report(os, report);
  return kExitOk;
}

int cmd_fit_latency(const std::string& template_spec, const std::string& samples_path,
                    const std::string& out_model, std::uint64_t seed, double synth_sigma,
                    int synth_count, const std::string& emit_samples) {
  Template t = parse_template_spec(template_spec);

  if (!emit_samples.empty()) {
    // synthesize profiles from a hidden model instead of reading them
    ResourceGraph hidden = random_latency_model(t, seed);
    ProfileFile file;
    file.unit = hidden.unit;
    for (const TemplateNode& node : t.nodes) file.var_names.push_back(node.name);
    file.samples = generate_profiles(t, hidden, synth_sigma, synth_count, seed + 1);
    save_profiles(emit_samples, file);
    std::cout << "wrote " << file.samples.size() << " synthetic profiles to " << emit_samples
              << "\n";
    if (samples_path.empty()) return kExitOk;
  }

  if (samples_path.empty()) {
    throw std::invalid_argument("fit-latency needs --samples (or --emit-samples to synthesize)");
  }
  ProfileFile profiles = load_profiles(samples_path);
  if (static_cast<int>(profiles.var_names.size()) != t.num_nodes()) {
    throw std::invalid_argument("sample file has " + std::to_string(profiles.var_names.size()) +
                                " variables, template has " + std::to_string(t.num_nodes()));
  }
  LatencyFit fit = fit_latency(t, profiles.samples);
  std::cout << "fitted " << profiles.samples.size() << " samples, residual rms "
            << fmt(fit.residual_rms) << ", rank " << fit.rank
            << (fit.rank_deficient ? " (rank deficient; predictions remain identified)" : "")
            << "\n";
  if (!out_model.empty()) {
    save_resource_graph(out_model, fit.model);
    std::cout << "wrote latency model to " << out_model << "\n";
  }
  return kExitOk;
}

int cmd_sample(const std::string& graph_path, std::uint64_t seed, int sweeps, int count,
               const std::string& out_path) {
  FactorGraph g = load_factor_graph(graph_path);
  GibbsChain chain(g, seed);
  for (int s = 0; s < sweeps; ++s) gibbs_sweep(chain);

  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);
  os << "mrf-samples v1\n";
  os << "vars " << g.num_vars() << "\n";
  os << "seed " << seed << "\n";
  os << "burnin " << sweeps << "\n";
  os << "count " << count << "\n";
  for (int s = 0; s < count; ++s) {
    if (s > 0) gibbs_sweep(chain);
    for (int v = 0; v < g.num_vars(); ++v) os << (v ? " " : "") << chain.state[v];
    os << "\n";
  }
  return kExitOk;
}

int cmd_learn(const std::string& template_spec, const std::string& graph_path,
              const std::string& oracle_spec, LearnConfig learn_cfg,
              const std::string& out_graph, const std::string& out_history) {
  FactorGraph skeleton;
  if (!template_spec.empty()) {
    skeleton = to_factor_graph_skeleton(parse_template_spec(template_spec));
  } else if (!graph_path.empty()) {
    skeleton = load_factor_graph(graph_path);
  } else {
    throw std::invalid_argument("learn needs --template or --graph");
  }

  ObjectiveOracle oracle = make_oracle_from_spec(skeleton, oracle_spec);
  LearnResult result = learn_factors(skeleton, oracle, learn_cfg);

  if (!out_graph.empty()) {
    save_factor_graph(out_graph, result.graph);
    std::cout << "wrote learned factors to " << out_graph << "\n";
  }
  if (!out_history.empty()) {
    std::ofstream os(out_history);
    if (!os) throw std::runtime_error("cannot open '" + out_history + "' for writing");
    os << "loss-history v1\n";
    for (double l : result.loss_history) os << fmt(l) << "\n";
  }
  std::cout << "iterations " << result.loss_history.size() << ", sweeps " << result.total_sweeps
            << "\n";
  if (!result.loss_history.empty()) {
    std::cout << "first-loss " << fmt(result.loss_history.front()) << " last-loss "
              << fmt(result.loss_history.back()) << "\n";
  }
  return kExitOk;
}

int cmd_space(const std::string& backbone, int depth, int base_width, int in_channels,
              int in_size, const std::string& emit_skeleton) {
  Template t = parse_template_spec(backbone + ":depth=" + std::to_string(depth) +
                                   ",width=" + std::to_string(base_width) +
                                   ",channels=" + std::to_string(in_channels) +
                                   ",size=" + std::to_string(in_size));
  FactorGraph skeleton = to_factor_graph_skeleton(t);
  std::cout << "backbone " << t.backbone << "\n";
  std::cout << "depth " << depth << "\n";
  std::cout << "nodes " << t.num_nodes() << "\n";
  std::cout << "edges " << t.edges.size() << "\n";
  std::cout << "clique-size " << clique_size(skeleton) << "\n";
  std::cout << "space-size " << space_size(t) << "\n";
  if (!emit_skeleton.empty()) {
    save_factor_graph(emit_skeleton, skeleton);
    std::cout << "wrote skeleton to " << emit_skeleton << "\n";
  }
  return kExitOk;
}

int cmd_flops(const std::string& template_spec, const std::string& assignment_text,
              const std::string& emit_model, const std::string& profiles_out, int profile_count,
              std::uint64_t seed) {
  Template t = parse_template_spec(template_spec);
  ResourceGraph model = flops_pairwise(t);
  if (!emit_model.empty()) {
    save_resource_graph(emit_model, model);
    std::cout << "wrote flops model to " << emit_model << "\n";
  }
  if (!profiles_out.empty()) {
    // exact MAC measurements of random assignments, in profile format
    ProfileFile file;
    file.unit = ResourceUnit::Macs;
    for (const TemplateNode& node : t.nodes) file.var_names.push_back(node.name);
    file.samples = generate_profiles(t, model, 0.0, profile_count, seed);
    save_profiles(profiles_out, file);
    std::cout << "wrote " << file.samples.size() << " exact profiles to " << profiles_out
              << "\n";
  }
  if (!assignment_text.empty()) {
    Assignment a = parse_assignment_text(assignment_text);
    NetConfig config = decode(t, a);
    print_net_config(std::cout, t, config);
    std::cout << "pairwise-macs " << fmt(resource_of(model, a)) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairwise-MRF architecture search toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // --seed may appear before or after the subcommand

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "global random seed")->capture_default_str();

  // solve-map
  auto* solve = app.add_subcommand("solve-map", "MAP assignment of a factor graph");
  std::string graph_path, algo = "exact", out_path;
  std::uint64_t table_budget = kDefaultTableBudget;
  solve->add_option("--graph", graph_path, "factor graph file")->required();
  solve->add_option("--algo", algo, "exact|mplp")->capture_default_str();
  solve->add_option("--budget", table_budget, "clique table entry budget")->capture_default_str();
  solve->add_option("--out", out_path, "output file (default stdout)");

  // diverse
  auto* diverse = app.add_subcommand("diverse", "diverse M-best assignments");
  int m = 5;
  double L = 10.0;
  diverse->add_option("--graph", graph_path, "factor graph file")->required();
  diverse->add_option("--m", m, "number of solutions")->capture_default_str();
  diverse->add_option("--L", L, "diversity divisor")->capture_default_str();
  diverse->add_option("--algo", algo, "exact|mplp")->capture_default_str();
  diverse->add_option("--out", out_path, "output file (default stdout)");

  // search
  auto* search = app.add_subcommand("search", "resource-constrained architecture search");
  std::string perf_path, res_path, unit;
  double target = 0.0, gamma_lo = -1.0;
  int iters = 20;
  search->add_option("--perf", perf_path, "performance factor graph")->required();
  search->add_option("--res", res_path, "resource graph (with unit line)")->required();
  search->add_option("--target", target, "resource target")->required();
  search->add_option("--unit", unit, "target unit macs|ms (default: resource file's)");
  search->add_option("--iters", iters, "bisection iterations")->capture_default_str();
  search->add_option("--m", m, "diverse solutions")->capture_default_str();
  search->add_option("--L", L, "diversity divisor")->capture_default_str();
  search->add_option("--algo", algo, "exact|mplp")->capture_default_str();
  search->add_option("--gamma-lo", gamma_lo, "initial bracket lower end")->capture_default_str();
  search->add_option("--out", out_path, "report file (default stdout)");

  // fit-latency
  auto* fit = app.add_subcommand("fit-latency", "fit a pairwise latency model from profiles");
  std::string template_spec, samples_path, out_model, emit_samples;
  double synth_sigma = 0.0;
  int synth_count = 256;
  fit->add_option("--template", template_spec, "e.g. unet:depth=2,width=8,size=16")->required();
  fit->add_option("--samples", samples_path, "profile sample file");
  fit->add_option("--out-model", out_model, "write fitted resource graph here");
  fit->add_option("--emit-samples", emit_samples, "synthesize profiles into this file first");
  fit->add_option("--synth-sigma", synth_sigma, "noise sigma for synthesized profiles")
      ->capture_default_str();
  fit->add_option("--synth-count", synth_count, "number of synthesized profiles")
      ->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "Gibbs-sample assignments from a factor graph");
  int sweeps = 1000, count = 1;
  sample->add_option("--graph", graph_path, "factor graph file")->required();
  sample->add_option("--sweeps", sweeps, "burn-in sweeps")->capture_default_str();
  sample->add_option("--count", count, "samples to emit (one sweep apart)")
      ->capture_default_str();
  sample->add_option("--out", out_path, "output file (default stdout)");

  // learn
  auto* learn = app.add_subcommand("learn", "learn performance factors from an objective oracle");
  std::string oracle_spec, out_graph, out_history;
  LearnConfig learn_cfg;
  learn->add_option("--template", template_spec, "template spec (skeleton source)");
  learn->add_option("--graph", graph_path, "skeleton factor graph file");
  learn->add_option("--oracle", oracle_spec, "separable:SEED | pairwise:SEED[:COUPLING]")
      ->required();
  learn->add_option("--epochs", learn_cfg.epochs)->capture_default_str();
  learn->add_option("--iters", learn_cfg.iters_per_epoch)->capture_default_str();
  learn->add_option("--n-long", learn_cfg.lsbs.n_long)->capture_default_str();
  learn->add_option("--n-short", learn_cfg.lsbs.n_short)->capture_default_str();
  learn->add_option("--n-mc", learn_cfg.lsbs.n_mc)->capture_default_str();
  learn->add_option("--tau", learn_cfg.lsbs.tau)->capture_default_str();
  learn->add_option("--step", learn_cfg.step_size)->capture_default_str();
  learn->add_option("--warmup", learn_cfg.warmup_epochs)->capture_default_str();
  learn->add_option("--window", learn_cfg.window)->capture_default_str();
  learn->add_option("--out-graph", out_graph, "write learned factors here");
  learn->add_option("--out-history", out_history, "write per-iteration mean losses here");

  // space
  auto* space = app.add_subcommand("space", "search-space statistics of a backbone");
  std::string backbone = "unet", emit_skeleton;
  int depth = 5, base_width = 64, in_channels = 3, in_size = 256;
  space->add_option("--backbone", backbone, "unet|unet+|unet++")->capture_default_str();
  space->add_option("--depth", depth)->capture_default_str();
  space->add_option("--base-width", base_width)->capture_default_str();
  space->add_option("--in-channels", in_channels)->capture_default_str();
  space->add_option("--in-size", in_size)->capture_default_str();
  space->add_option("--emit-skeleton", emit_skeleton, "write all-zero factor graph here");

  // flops
  auto* flops = app.add_subcommand("flops", "exact MAC counts of a template");
  std::string assignment_text, profiles_out;
  int profile_count = 256;
  flops->add_option("--template", template_spec, "template spec")->required();
  flops->add_option("--assignment", assignment_text, "label indices, e.g. 2,2,2,2,2,2,2,2");
  flops->add_option("--emit-model", out_model, "write pairwise FLOPs model here");
  flops->add_option("--profiles-out", profiles_out, "write exact MAC profiles here");
  flops->add_option("--profile-count", profile_count, "profiles to write")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve_map(graph_path, algo, table_budget, out_path);
    if (diverse->parsed()) return cmd_diverse(graph_path, m, L, algo, out_path);
    if (search->parsed()) {
      return cmd_search(perf_path, res_path, target, unit, iters, m, L, algo, gamma_lo, out_path);
    }
    if (fit->parsed()) {
      return cmd_fit_latency(template_spec, samples_path, out_model, seed, synth_sigma,
                             synth_count, emit_samples);
    }
    if (sample->parsed()) return cmd_sample(graph_path, seed, sweeps, count, out_path);
    if (learn->parsed()) {
      learn_cfg.seed = seed;
      return cmd_learn(template_spec, graph_path, oracle_spec, learn_cfg, out_graph, out_history);
    }
    if (space->parsed()) {
      return cmd_space(backbone, depth, base_width, in_channels, in_size, emit_skeleton);
    }
    if (flops->parsed()) {
      return cmd_flops(template_spec, assignment_text, out_model, profiles_out, profile_count,
                       seed);
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
