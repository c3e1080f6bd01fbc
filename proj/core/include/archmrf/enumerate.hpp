#pragma once

#include <cstdint>
#include <vector>

#include "archmrf/factor_graph.hpp"
#include "archmrf/types.hpp"

namespace archmrf {

inline constexpr std::uint64_t kDefaultMaxSpace = 10'000'000;

/// Product of cardinalities, or throws SpaceTooLargeError beyond `max_space`.
std::uint64_t checked_space(const std::vector<int>& cards, std::uint64_t max_space);

/// Mixed-radix rank of an assignment; the last variable varies fastest, so
/// ranks follow lexicographic order of the label vectors.
std::uint64_t assignment_index(const std::vector<int>& cards, const Assignment& a);

/// Assignment with the given rank.
Assignment assignment_at(const std::vector<int>& cards, std::uint64_t index);

/// Calls fn(a) for every assignment in lexicographic order.
template <typename Fn>
void for_each_assignment(const std::vector<int>& cards, Fn&& fn) {
  const int n = static_cast<int>(cards.size());
  Assignment a(n, 0);
  for (int v = 0; v < n; ++v) {
    if (cards[v] <= 0) return;  // empty space
  }
  while (true) {
    fn(static_cast<const Assignment&>(a));
    int v = n - 1;
    while (v >= 0 && a[v] + 1 == cards[v]) {
      a[v] = 0;
      --v;
    }
    if (v < 0) break;
    ++a[v];
  }
}

/// Exhaustive MAP; ties broken by the lexicographically smallest label vector.
ScoredAssignment brute_force_map(const FactorGraph& g,
                                 std::uint64_t max_space = kDefaultMaxSpace);

/// Normalized probabilities of all assignments, indexed by assignment_index.
std::vector<double> exact_distribution(const FactorGraph& g,
                                       std::uint64_t max_space = kDefaultMaxSpace);

}  // namespace archmrf
