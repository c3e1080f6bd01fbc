#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "archmrf/arch_template.hpp"
#include "archmrf/factor_graph.hpp"

namespace archmrf {

/// Exact pairwise decomposition of the whole-network MAC count.
///
/// Each data-flow edge (i -> j) carries k_j^2 * c_out(i) * c_out(j) * H_j * W_j;
/// a concatenation consumer's input channels are the sum over its incoming
/// edges, and the MAC count is linear in each summand, so the per-edge split
/// is exact. Nodes without predecessors contribute a unary term using the
/// template's input channels. Summing the factors reproduces the direct
/// whole-network count for every assignment, bit-exactly.
ResourceGraph flops_pairwise(const Template& t);

/// Additive resource score of an assignment under a resource model.
double resource_of(const ResourceGraph& model, const Assignment& a);

struct ProfilingSample {
  Assignment assignment;
  double measured = 0.0;
};

struct LatencyFit {
  ResourceGraph model;
  double residual_rms = 0.0;
  bool rank_deficient = false;
  int rank = 0;
};

/// Least-squares fit of per-edge pairwise latency tables from whole-network
/// measurements ("profiles"). Per-layer constants are representable as column
/// shifts of an incident pairwise table, so the design matrix has pairwise
/// entries only; the minimum-norm solution is taken when the system is
/// rank-deficient (individual entries are then identifiable only up to
/// shifts, but predictions are). Throws std::invalid_argument on an empty
/// sample set.
LatencyFit fit_latency(const Template& t, const std::vector<ProfilingSample>& samples);

/// Synthetic stand-in for hardware profiling: uniform random assignments
/// measured under `hidden` plus Gaussian noise. Deterministic per seed.
std::vector<ProfilingSample> generate_profiles(const Template& t, const ResourceGraph& hidden,
                                               double noise_sigma, int count, std::uint64_t seed);

// Profiling sample file ("profile-samples v1"): unit line, a header row naming
// the variables, then one row per sample with label indices and the
// measurement.
struct ProfileFile {
  ResourceUnit unit = ResourceUnit::Milliseconds;
  std::vector<std::string> var_names;
  std::vector<ProfilingSample> samples;
};

void save_profiles(const std::string& path, const ProfileFile& file);
ProfileFile load_profiles(const std::string& path);

/// Random positive pairwise resource model on the template's skeleton;
/// hidden ground truth for fitting tests and synthetic profiling.
ResourceGraph random_latency_model(const Template& t, std::uint64_t seed);

}  // namespace archmrf
