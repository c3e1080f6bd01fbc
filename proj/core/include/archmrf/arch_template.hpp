#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "archmrf/factor_graph.hpp"

namespace archmrf {

using BigInt = boost::multiprecision::cpp_int;

enum class OpType { Normal, Down, Up };

std::string to_string(OpType op);

/// One searchable option of a node: convolution kernel size and the width
/// ratio applied to the node's base channel count.
struct ArchLabel {
  int kernel = 3;
  double width = 1.0;
};

/// Label-set recipe per Table-style search space. The default is the full
/// space (Normal: {3,5} x 5 widths, Down: kernel 3, Up: kernel 2); reduced
/// schemes keep toy templates exhaustively enumerable.
struct LabelScheme {
  std::vector<int> normal_kernels{3, 5};
  std::vector<double> widths{0.5, 0.75, 1.0, 1.25, 1.5};
  int down_kernel = 3;
  int up_kernel = 2;
};

struct TemplateNode {
  OpType op = OpType::Normal;
  int level = 0;          // depth index; level 0 is full resolution
  int base_channels = 0;  // output channels at width ratio 1.0
  int out_h = 0;
  int out_w = 0;
  std::vector<ArchLabel> labels;
  std::string name;
};

/// Directed data-flow edge (producer feeds consumer).
struct FlowEdge {
  int from = 0;
  int to = 0;
};

/// Encoder-decoder macro-architecture whose choice nodes become MRF variables.
struct Template {
  std::string backbone;  // "unet", "unet+", "unet++"
  std::vector<TemplateNode> nodes;
  std::vector<FlowEdge> edges;
  int in_channels = 3;
  int in_h = 256;
  int in_w = 256;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  std::vector<std::vector<int>> predecessors() const;
};

/// Classic UNet skeleton: per level two Normal convs, strided-conv Down
/// between levels, transposed-conv Up plus a two-conv decoder block per level,
/// and one skip edge per level into the first decoder conv (the concatenation
/// consumer). Depth d yields 6d - 4 nodes.
Template build_unet_template(int depth, int base_width = 64, int in_channels = 3, int in_h = 256,
                             int in_w = 256, const LabelScheme& scheme = {});

/// Nested-skip variant: a full triangle of decoder units, each unit being
/// Up + two Normal convs, where a unit consumes only its immediate same-level
/// predecessor. Used for clique-size analysis.
Template build_unet_plus_template(int depth, int base_width = 64, int in_channels = 3,
                                  int in_h = 256, int in_w = 256, const LabelScheme& scheme = {});

/// As unet+ but with dense skips: each unit consumes every earlier same-level
/// output.
Template build_unet_plusplus_template(int depth, int base_width = 64, int in_channels = 3,
                                      int in_h = 256, int in_w = 256,
                                      const LabelScheme& scheme = {});

/// Exact number of configurations: product of per-node label counts.
BigInt space_size(const Template& t);

/// One MRF variable per node, one MRF edge per data-flow edge, all factors
/// zero. The per-level skip edges close cycles through the bottleneck, which
/// is what makes the graph loopy.
FactorGraph to_factor_graph_skeleton(const Template& t);

/// Index of the label with the given kernel/width in a node's label list,
/// or -1 when absent.
int label_index(const TemplateNode& node, int kernel, double width);

struct NetLayer {
  OpType op = OpType::Normal;
  int kernel = 3;
  double width = 1.0;
  int in_channels = 0;
  int out_channels = 0;
  int out_h = 0;
  int out_w = 0;
};

/// Concrete per-layer configuration decoded from an assignment.
struct NetConfig {
  std::vector<NetLayer> layers;
};

/// round-half-up of base * width, floored at one channel
int resolved_channels(int base_channels, double width);

/// Resolves kernels, widths and channel counts; concatenation consumers see
/// the sum of their predecessors' output channels.
NetConfig decode(const Template& t, const Assignment& a);

/// Whole-network multiply-accumulate count from resolved layers
/// (k^2 * c_in * c_out * H_out * W_out per layer; no x2 for the accumulate).
std::uint64_t mac_count(const NetConfig& config);

/// Same count computed straight from template metadata and labels, without
/// building a NetConfig; suited to exhaustive sweeps.
std::uint64_t mac_count_direct(const Template& t, const Assignment& a);

void print_net_config(std::ostream& os, const Template& t, const NetConfig& config);

}  // namespace archmrf
