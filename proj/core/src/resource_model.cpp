#include "archmrf/resource_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "archmrf/graph_io.hpp"

namespace archmrf {

namespace {

struct EdgeLayout {
  std::vector<GraphEdge> edges;       // normalized (i < j), deduplicated
  std::vector<int> flow_to_edge;      // per template flow edge: index into edges
  std::vector<std::size_t> offset;    // column offset of each edge's table
  std::size_t total_entries = 0;
  std::vector<int> rows, cols;

  EdgeLayout(const Template& t, const FactorGraph& skeleton) {
    std::map<std::pair<int, int>, int> index;
    flow_to_edge.reserve(t.edges.size());
    for (const FlowEdge& fe : t.edges) {
      std::pair<int, int> key{std::min(fe.from, fe.to), std::max(fe.from, fe.to)};
      auto [it, inserted] = index.emplace(key, static_cast<int>(edges.size()));
      if (inserted) {
        edges.push_back({key.first, key.second});
        rows.push_back(skeleton.num_labels(key.first));
        cols.push_back(skeleton.num_labels(key.second));
      }
      flow_to_edge.push_back(it->second);
    }
    offset.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      offset[e] = total_entries;
      total_entries += static_cast<std::size_t>(rows[e]) * cols[e];
    }
  }

  std::size_t column(int e, int a, int b) const {
    return offset[e] + static_cast<std::size_t>(a) * cols[e] + b;
  }
};

}  // namespace

ResourceGraph flops_pairwise(const Template& t) {
  for (const TemplateNode& node : t.nodes) {
    if (node.base_channels <= 0 || node.out_h <= 0 || node.out_w <= 0) {
      throw std::invalid_argument("template node '" + node.name + "' lacks channel metadata");
    }
  }

  FactorGraph skeleton = to_factor_graph_skeleton(t);
  EdgeLayout layout(t, skeleton);

  std::vector<std::vector<double>> unary(t.num_nodes());
  for (int v = 0; v < t.num_nodes(); ++v) unary[v].assign(skeleton.num_labels(v), 0.0);
  std::vector<PairTable> tables;
  tables.reserve(layout.edges.size());
  for (std::size_t e = 0; e < layout.edges.size(); ++e) {
    tables.emplace_back(layout.rows[e], layout.cols[e]);
  }

  std::vector<bool> has_pred(t.num_nodes(), false);
  for (const FlowEdge& fe : t.edges) has_pred[fe.to] = true;

  // per-edge bilinear MAC contribution of the consumer
  for (std::size_t f = 0; f < t.edges.size(); ++f) {
    const FlowEdge& fe = t.edges[f];
    const TemplateNode& src = t.nodes[fe.from];
    const TemplateNode& dst = t.nodes[fe.to];
    PairTable& table = tables[layout.flow_to_edge[f]];
    const bool src_is_row = layout.edges[layout.flow_to_edge[f]].i == fe.from;
    for (std::size_t sa = 0; sa < src.labels.size(); ++sa) {
      const double c_src = resolved_channels(src.base_channels, src.labels[sa].width);
      for (std::size_t db = 0; db < dst.labels.size(); ++db) {
        const ArchLabel& dl = dst.labels[db];
        const double c_dst = resolved_channels(dst.base_channels, dl.width);
        const double macs = static_cast<double>(dl.kernel) * dl.kernel * c_src * c_dst *
                            dst.out_h * dst.out_w;
        if (src_is_row) {
          table.at(static_cast<int>(sa), static_cast<int>(db)) += macs;
        } else {
          table.at(static_cast<int>(db), static_cast<int>(sa)) += macs;
        }
      }
    }
  }

  // nodes fed by the network input contribute a label-only term
  for (int v = 0; v < t.num_nodes(); ++v) {
    if (has_pred[v]) continue;
    const TemplateNode& node = t.nodes[v];
    for (std::size_t a = 0; a < node.labels.size(); ++a) {
      const ArchLabel& l = node.labels[a];
      unary[v][a] = static_cast<double>(l.kernel) * l.kernel * t.in_channels *
                    resolved_channels(node.base_channels, l.width) * node.out_h * node.out_w;
    }
  }

  FactorGraph g(skeleton.label_sets(), std::move(unary), layout.edges, std::move(tables));
  return ResourceGraph{std::move(g), ResourceUnit::Macs};
}

double resource_of(const ResourceGraph& model, const Assignment& a) {
  return log_energy(model.graph, a);
}

LatencyFit fit_latency(const Template& t, const std::vector<ProfilingSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("fit_latency needs at least one sample");

  FactorGraph skeleton = to_factor_graph_skeleton(t);
  for (const ProfilingSample& s : samples) validate_assignment(skeleton, s.assignment);

  EdgeLayout layout(t, skeleton);
  const std::size_t m = samples.size();
  const std::size_t p = layout.total_entries;

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(m, p);
  Eigen::VectorXd y(m);
  for (std::size_t s = 0; s < m; ++s) {
    const Assignment& a = samples[s].assignment;
    for (std::size_t e = 0; e < layout.edges.size(); ++e) {
      const GraphEdge& ed = layout.edges[e];
      design(s, layout.column(static_cast<int>(e), a[ed.i], a[ed.j])) += 1.0;
    }
    y(s) = samples[s].measured;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  Eigen::VectorXd theta = cod.solve(y);  // minimum-norm least squares

  LatencyFit fit;
  fit.rank = static_cast<int>(cod.rank());
  fit.rank_deficient = fit.rank < static_cast<int>(p);
  fit.residual_rms = std::sqrt((design * theta - y).squaredNorm() / static_cast<double>(m));

  std::vector<PairTable> tables;
  tables.reserve(layout.edges.size());
  for (std::size_t e = 0; e < layout.edges.size(); ++e) {
    PairTable table(layout.rows[e], layout.cols[e]);
    for (int a = 0; a < table.rows; ++a) {
      for (int b = 0; b < table.cols; ++b) {
        table.at(a, b) = theta(layout.column(static_cast<int>(e), a, b));
      }
    }
    tables.push_back(std::move(table));
  }
  FactorGraph g(skeleton.label_sets(), {}, layout.edges, std::move(tables));
  fit.model = ResourceGraph{std::move(g), ResourceUnit::Milliseconds};
  return fit;
}

std::vector<ProfilingSample> generate_profiles(const Template& t, const ResourceGraph& hidden,
                                               double noise_sigma, int count,
                                               std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("profile count must be >= 1");
  if (noise_sigma < 0) throw std::invalid_argument("noise sigma must be non-negative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);

  std::vector<ProfilingSample> samples;
  samples.reserve(count);
  for (int s = 0; s < count; ++s) {
    Assignment a(t.num_nodes());
    for (int v = 0; v < t.num_nodes(); ++v) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(t.nodes[v].labels.size()) - 1);
      a[v] = pick(rng);
    }
    double measured = resource_of(hidden, a);
    if (noise_sigma > 0) measured += noise(rng);
    samples.push_back({std::move(a), measured});
  }
  return samples;
}

void save_profiles(const std::string& path, const ProfileFile& file) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "profile-samples v1\n";
  os << "unit: " << to_string(file.unit) << "\n";
  os << "vars";
  for (const std::string& name : file.var_names) os << " " << name;
  os << "\n";
  char buf[40];
  for (const ProfilingSample& s : file.samples) {
    for (int label : s.assignment) os << label << " ";
    std::snprintf(buf, sizeof(buf), "%.17g", s.measured);
    os << buf << "\n";
  }
}

ProfileFile load_profiles(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");

  ProfileFile file;
  std::string line;
  int line_no = 0;

  auto next_line = [&](std::string& out) {
    while (std::getline(is, out)) {
      ++line_no;
      if (out.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (out[out.find_first_not_of(" \t\r")] == '#') continue;
      return true;
    }
    return false;
  };

  if (!next_line(line) || line.rfind("profile-samples v1", 0) != 0) {
    throw ParseError("expected 'profile-samples v1' header", line_no ? line_no : 1);
  }
  if (!next_line(line)) throw ParseError("expected 'unit: macs|ms'", line_no + 1);
  {
    std::istringstream iss(line);
    std::string kw, unit;
    iss >> kw >> unit;
    if (kw != "unit:") throw ParseError("expected 'unit: macs|ms'", line_no);
    try {
      file.unit = resource_unit_from_string(unit);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!next_line(line)) throw ParseError("expected 'vars name...'", line_no + 1);
  {
    std::istringstream iss(line);
    std::string kw, name;
    iss >> kw;
    if (kw != "vars") throw ParseError("expected 'vars name...'", line_no);
    while (iss >> name) file.var_names.push_back(name);
    if (file.var_names.empty()) throw ParseError("empty variable list", line_no);
  }

  const std::size_t n = file.var_names.size();
  while (next_line(line)) {
    std::istringstream iss(line);
    ProfilingSample s;
    s.assignment.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      if (!(iss >> s.assignment[v]) || s.assignment[v] < 0) {
        throw ParseError("expected " + std::to_string(n) + " label indices", line_no);
      }
    }
    if (!(iss >> s.measured)) throw ParseError("missing measurement value", line_no);
    std::string extra;
    if (iss >> extra) throw ParseError("trailing characters '" + extra + "'", line_no);
    file.samples.push_back(std::move(s));
  }
  return file;
}

ResourceGraph random_latency_model(const Template& t, std::uint64_t seed) {
  FactorGraph skeleton = to_factor_graph_skeleton(t);
  EdgeLayout layout(t, skeleton);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(0.05, 2.0);

  std::vector<PairTable> tables;
  for (std::size_t e = 0; e < layout.edges.size(); ++e) {
    PairTable table(layout.rows[e], layout.cols[e]);
    for (double& x : table.values) x = entry(rng);
    tables.push_back(std::move(table));
  }
  FactorGraph g(skeleton.label_sets(), {}, layout.edges, std::move(tables));
  return ResourceGraph{std::move(g), ResourceUnit::Milliseconds};
}

}  // namespace archmrf
