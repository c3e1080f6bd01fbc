#include "archmrf/graph_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace archmrf {

namespace {

constexpr const char* kMagic = "mrf-graph v1";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + tok + "'", line_no);
  }
  if (pos != tok.size()) throw ParseError("trailing characters in number '" + tok + "'", line_no);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + tok + "'", line_no);
  return v;
}

long parse_int(const std::string& tok, int line_no) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + tok + "'", line_no);
  }
  if (pos != tok.size()) throw ParseError("trailing characters in integer '" + tok + "'", line_no);
  return v;
}

// Reads lines, skipping blanks and '#' comments, tracking line numbers.
struct LineReader {
  std::istream& is;
  int line_no = 0;

  bool next(std::string& out) {
    std::string raw;
    while (std::getline(is, raw)) {
      ++line_no;
      std::size_t start = raw.find_first_not_of(" \t\r");
      if (start == std::string::npos) continue;
      if (raw[start] == '#') continue;
      out = raw.substr(start);
      while (!out.empty() && (out.back() == '\r' || out.back() == ' ' || out.back() == '\t')) {
        out.pop_back();
      }
      return true;
    }
    return false;
  }
};

}  // namespace

void save_factor_graph(std::ostream& os, const FactorGraph& g,
                       std::optional<ResourceUnit> unit) {
  os << kMagic << "\n";
  os << "vars " << g.num_vars() << "\n";
  for (int v = 0; v < g.num_vars(); ++v) {
    os << "labels " << v << ":";
    for (const std::string& name : g.label_set(v).labels) os << " " << name;
    os << "\n";
  }
  if (unit) os << "unit: " << to_string(*unit) << "\n";
  for (int v = 0; v < g.num_vars(); ++v) {
    os << "unary " << v << ":";
    for (double x : g.unary(v)) os << " " << fmt_double(x);
    os << "\n";
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const GraphEdge& ed = g.edge(e);
    os << "pairwise " << ed.i << " " << ed.j << ":\n";
    const PairTable& t = g.pairwise(e);
    for (int a = 0; a < t.rows; ++a) {
      for (int b = 0; b < t.cols; ++b) os << (b ? " " : "") << fmt_double(t.at(a, b));
      os << "\n";
    }
  }
  os << "constant: " << fmt_double(g.constant()) << "\n";
}

void save_factor_graph(const std::string& path, const FactorGraph& g,
                       std::optional<ResourceUnit> unit) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_factor_graph(os, g, unit);
}

void save_resource_graph(const std::string& path, const ResourceGraph& rg) {
  save_factor_graph(path, rg.graph, rg.unit);
}

FactorGraph load_factor_graph(std::istream& is, std::optional<ResourceUnit>* unit_out) {
  LineReader reader{is};
  std::string line;

  if (!reader.next(line)) throw ParseError("empty file, expected '" + std::string(kMagic) + "'", 1);
  if (line != kMagic) throw ParseError("bad header '" + line + "', expected '" + kMagic + "'",
                                       reader.line_no);

  if (!reader.next(line)) throw ParseError("expected 'vars N'", reader.line_no + 1);
  std::vector<std::string> toks = split_ws(line);
  if (toks.size() != 2 || toks[0] != "vars") throw ParseError("expected 'vars N'", reader.line_no);
  long n = parse_int(toks[1], reader.line_no);
  if (n <= 0) throw ParseError("variable count must be positive", reader.line_no);

  std::vector<LabelSet> label_sets(n);
  for (long v = 0; v < n; ++v) {
    if (!reader.next(line)) throw ParseError("expected 'labels " + std::to_string(v) + ": ...'",
                                             reader.line_no + 1);
    toks = split_ws(line);
    if (toks.size() < 3 || toks[0] != "labels" || toks[1] != std::to_string(v) + ":") {
      throw ParseError("expected 'labels " + std::to_string(v) + ": name...'", reader.line_no);
    }
    for (std::size_t k = 2; k < toks.size(); ++k) label_sets[v].labels.push_back(toks[k]);
  }

  std::vector<std::vector<double>> unary(n);
  std::vector<GraphEdge> edges;
  std::vector<PairTable> pairwise;
  double constant = 0.0;
  bool have_constant = false;
  std::optional<ResourceUnit> unit;

  while (reader.next(line)) {
    toks = split_ws(line);
    if (toks[0] == "unary") {
      if (toks.size() < 2) throw ParseError("expected 'unary i: v...'", reader.line_no);
      std::string idx = toks[1];
      if (idx.empty() || idx.back() != ':') throw ParseError("expected ':' after variable index",
                                                             reader.line_no);
      long v = parse_int(idx.substr(0, idx.size() - 1), reader.line_no);
      if (v < 0 || v >= n) throw ParseError("unary variable index out of range", reader.line_no);
      if (!unary[v].empty()) throw ParseError("duplicate unary table for variable " +
                                              std::to_string(v), reader.line_no);
      if (static_cast<long>(toks.size()) - 2 != label_sets[v].size()) {
        throw ParseError("unary table for variable " + std::to_string(v) + " has " +
                         std::to_string(toks.size() - 2) + " values, expected " +
                         std::to_string(label_sets[v].size()), reader.line_no);
      }
      for (std::size_t k = 2; k < toks.size(); ++k) {
        unary[v].push_back(parse_double(toks[k], reader.line_no));
      }
      if (unary[v].empty()) unary[v].assign(label_sets[v].size(), 0.0);
    } else if (toks[0] == "pairwise") {
      if (toks.size() != 3 || toks[2].empty() || toks[2].back() != ':') {
        throw ParseError("expected 'pairwise i j:'", reader.line_no);
      }
      long i = parse_int(toks[1], reader.line_no);
      long j = parse_int(toks[2].substr(0, toks[2].size() - 1), reader.line_no);
      if (i < 0 || i >= n || j < 0 || j >= n) {
        throw ParseError("pairwise variable index out of range", reader.line_no);
      }
      if (i == j) throw ParseError("self-loop on variable " + std::to_string(i), reader.line_no);
      for (const GraphEdge& ed : edges) {
        if ((ed.i == std::min(i, j) && ed.j == std::max(i, j))) {
          throw ParseError("duplicate pairwise block for edge (" + std::to_string(i) + "," +
                           std::to_string(j) + ")", reader.line_no);
        }
      }
      PairTable t(label_sets[i].size(), label_sets[j].size());
      for (int a = 0; a < t.rows; ++a) {
        if (!reader.next(line)) {
          throw ParseError("pairwise block ended early, expected " + std::to_string(t.rows) +
                           " rows", reader.line_no + 1);
        }
        std::vector<std::string> row = split_ws(line);
        if (static_cast<int>(row.size()) != t.cols) {
          throw ParseError("pairwise row has " + std::to_string(row.size()) +
                           " values, expected " + std::to_string(t.cols), reader.line_no);
        }
        for (int b = 0; b < t.cols; ++b) t.at(a, b) = parse_double(row[b], reader.line_no);
      }
      edges.push_back({static_cast<int>(i), static_cast<int>(j)});
      pairwise.push_back(std::move(t));
    } else if (toks[0] == "constant:") {
      if (toks.size() != 2) throw ParseError("expected 'constant: c'", reader.line_no);
      if (have_constant) throw ParseError("duplicate constant line", reader.line_no);
      constant = parse_double(toks[1], reader.line_no);
      have_constant = true;
    } else if (toks[0] == "unit:") {
      if (toks.size() != 2) throw ParseError("expected 'unit: macs|ms'", reader.line_no);
      if (unit) throw ParseError("duplicate unit line", reader.line_no);
      try {
        unit = resource_unit_from_string(toks[1]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), reader.line_no);
      }
    } else {
      throw ParseError("unknown directive '" + toks[0] + "'", reader.line_no);
    }
  }

  if (unit_out) *unit_out = unit;
  try {
    return FactorGraph(std::move(label_sets), std::move(unary), std::move(edges),
                       std::move(pairwise), constant);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid graph: ") + e.what(), reader.line_no);
  }
}

FactorGraph load_factor_graph(const std::string& path, std::optional<ResourceUnit>* unit_out) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return load_factor_graph(is, unit_out);
}

ResourceGraph load_resource_graph(const std::string& path) {
  std::optional<ResourceUnit> unit;
  FactorGraph g = load_factor_graph(path, &unit);
  if (!unit) {
    throw std::runtime_error("resource graph file '" + path + "' is missing a 'unit:' line");
  }
  return ResourceGraph{std::move(g), *unit};
}

Assignment parse_assignment_text(const std::string& text) {
  std::string normalized = text;
  for (char& c : normalized) {
    if (c == ',') c = ' ';
  }
  Assignment a;
  for (const std::string& tok : split_ws(normalized)) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad label index '" + tok + "'");
    }
    if (pos != tok.size() || v < 0) throw std::invalid_argument("bad label index '" + tok + "'");
    a.push_back(v);
  }
  if (a.empty()) throw std::invalid_argument("empty assignment");
  return a;
}

}  // namespace archmrf
