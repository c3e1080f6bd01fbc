#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "archmrf/factor_graph.hpp"

namespace archmrf {

/// Parse failure with the 1-based line number of the offending input line.
struct ParseError : std::runtime_error {
  int line = 0;
  ParseError(const std::string& what, int line_no)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

// Factor-graph text format ("mrf-graph v1"):
//   vars N
//   labels i: name0 name1 ...        (one line per variable, in order)
//   unit: macs|ms                    (optional; required for resource graphs)
//   unary i: v0 v1 ...               (missing tables default to zeros)
//   pairwise i j:                    (followed by a k_i x k_j row-major block)
//   constant: c

void save_factor_graph(std::ostream& os, const FactorGraph& g,
                       std::optional<ResourceUnit> unit = std::nullopt);
void save_factor_graph(const std::string& path, const FactorGraph& g,
                       std::optional<ResourceUnit> unit = std::nullopt);
void save_resource_graph(const std::string& path, const ResourceGraph& rg);

FactorGraph load_factor_graph(std::istream& is, std::optional<ResourceUnit>* unit_out = nullptr);
FactorGraph load_factor_graph(const std::string& path,
                              std::optional<ResourceUnit>* unit_out = nullptr);
ResourceGraph load_resource_graph(const std::string& path);

/// Comma- or whitespace-separated label indices, e.g. "2,2,1,0".
Assignment parse_assignment_text(const std::string& text);

}  // namespace archmrf
