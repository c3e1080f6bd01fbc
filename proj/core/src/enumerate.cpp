#include "archmrf/enumerate.hpp"

#include <cmath>
#include <string>

namespace archmrf {

std::uint64_t checked_space(const std::vector<int>& cards, std::uint64_t max_space) {
  std::uint64_t total = 1;
  for (int k : cards) {
    if (k <= 0) throw std::invalid_argument("non-positive cardinality");
    if (total > max_space / static_cast<std::uint64_t>(k)) {
      throw SpaceTooLargeError("assignment space exceeds cap of " + std::to_string(max_space) +
                               " states");
    }
    total *= static_cast<std::uint64_t>(k);
  }
  return total;
}

std::uint64_t assignment_index(const std::vector<int>& cards, const Assignment& a) {
  std::uint64_t idx = 0;
  for (std::size_t v = 0; v < cards.size(); ++v) {
    idx = idx * static_cast<std::uint64_t>(cards[v]) + static_cast<std::uint64_t>(a[v]);
  }
  return idx;
}

Assignment assignment_at(const std::vector<int>& cards, std::uint64_t index) {
  Assignment a(cards.size(), 0);
  for (std::size_t v = cards.size(); v-- > 0;) {
    a[v] = static_cast<int>(index % static_cast<std::uint64_t>(cards[v]));
    index /= static_cast<std::uint64_t>(cards[v]);
  }
  return a;
}

ScoredAssignment brute_force_map(const FactorGraph& g, std::uint64_t max_space) {
  const std::vector<int> cards = g.cardinalities();
  checked_space(cards, max_space);

  ScoredAssignment best;
  bool first = true;
  // lexicographic enumeration + strict improvement keeps the smallest tie
  for_each_assignment(cards, [&](const Assignment& a) {
    double s = log_energy(g, a);
    if (first || s > best.score) {
      best.assignment = a;
      best.score = s;
      first = false;
    }
  });
  return best;
}

std::vector<double> exact_distribution(const FactorGraph& g, std::uint64_t max_space) {
  const std::vector<int> cards = g.cardinalities();
  const std::uint64_t total = checked_space(cards, max_space);

  std::vector<double> scores;
  scores.reserve(total);
  double max_score = -std::numeric_limits<double>::infinity();
  for_each_assignment(cards, [&](const Assignment& a) {
    double s = log_energy(g, a);
    scores.push_back(s);
    if (s > max_score) max_score = s;
  });

  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max_score);
    z += s;
  }
  for (double& s : scores) s /= z;
  return scores;
}

}  // namespace archmrf
