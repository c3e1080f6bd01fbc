#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace archmrf {

/// One label index per variable; the architecture encoding.
using Assignment = std::vector<int>;

/// Finite, ordered label set of a single variable.
struct LabelSet {
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(labels.size()); }

  /// Label set {"0", "1", ..., "k-1"}.
  static LabelSet indexed(int k);
};

/// Unordered variable pair, normalized so that i < j.
struct GraphEdge {
  int i = 0;
  int j = 0;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Dense row-major table over a pair of label sets.
struct PairTable {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  PairTable() = default;
  PairTable(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int a, int b) { return values[static_cast<std::size_t>(a) * cols + b]; }
  double at(int a, int b) const { return values[static_cast<std::size_t>(a) * cols + b]; }
};

struct ScoredAssignment {
  Assignment assignment;
  double score = 0.0;
};

enum class ResourceUnit { Macs, Milliseconds };

std::string to_string(ResourceUnit unit);
ResourceUnit resource_unit_from_string(const std::string& s);

/// Enumeration request exceeds the configured assignment-space cap.
struct SpaceTooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A clique table would exceed the configured entry budget.
struct BudgetExceededError : std::runtime_error {
  int clique_size = 0;
  double table_entries = 0.0;
  BudgetExceededError(const std::string& what, int clique, double entries)
      : std::runtime_error(what), clique_size(clique), table_entries(entries) {}
};

/// Constrained search found no assignment within the resource target.
struct InfeasibleError : std::runtime_error {
  double min_resource_seen = 0.0;
  InfeasibleError(const std::string& what, double min_resource)
      : std::runtime_error(what), min_resource_seen(min_resource) {}
};

}  // namespace archmrf
