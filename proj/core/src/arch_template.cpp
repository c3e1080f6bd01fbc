#include "archmrf/arch_template.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace archmrf {

std::string to_string(OpType op) {
  switch (op) {
    case OpType::Normal: return "normal";
    case OpType::Down: return "down";
    case OpType::Up: return "up";
  }
  return "?";
}

std::vector<std::vector<int>> Template::predecessors() const {
  std::vector<std::vector<int>> preds(nodes.size());
  for (const FlowEdge& e : edges) preds[e.to].push_back(e.from);
  return preds;
}

namespace {

std::string width_tag(double w) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", w);
  return buf;
}

std::vector<ArchLabel> labels_for(OpType op, const LabelScheme& scheme) {
  std::vector<ArchLabel> out;
  if (op == OpType::Normal) {
    for (int k : scheme.normal_kernels) {
      for (double w : scheme.widths) out.push_back({k, w});
    }
  } else {
    int k = op == OpType::Down ? scheme.down_kernel : scheme.up_kernel;
    for (double w : scheme.widths) out.push_back({k, w});
  }
  return out;
}

struct Builder {
  Template t;
  const LabelScheme& scheme;

  Builder(const std::string& backbone, int in_channels, int in_h, int in_w,
          const LabelScheme& s)
      : scheme(s) {
    t.backbone = backbone;
    t.in_channels = in_channels;
    t.in_h = in_h;
    t.in_w = in_w;
  }

  int add_node(OpType op, int level, int base_channels, std::string name) {
    TemplateNode node;
    node.op = op;
    node.level = level;
    node.base_channels = base_channels;
    node.out_h = std::max(1, t.in_h >> level);
    node.out_w = std::max(1, t.in_w >> level);
    node.labels = labels_for(op, scheme);
    node.name = std::move(name);
    t.nodes.push_back(std::move(node));
    return t.num_nodes() - 1;
  }

  void add_edge(int from, int to) { t.edges.push_back({from, to}); }
};

void check_depth(int depth) {
  if (depth < 2) throw std::invalid_argument("template depth must be >= 2");
}

// Encoder shared by all three backbones: two Normal convs per level with a
// strided Down conv between levels. Returns the last Normal node per level.
std::vector<int> build_encoder(Builder& b, int depth, int base_width) {
  std::vector<int> enc_out(depth);
  int prev = -1;
  for (int d = 0; d < depth; ++d) {
    int ch = base_width << d;
    if (d > 0) {
      int down = b.add_node(OpType::Down, d, ch, "down" + std::to_string(d));
      b.add_edge(prev, down);
      prev = down;
    }
    int n1 = b.add_node(OpType::Normal, d, ch, "enc" + std::to_string(d) + "_conv1");
    if (prev >= 0) b.add_edge(prev, n1);
    int n2 = b.add_node(OpType::Normal, d, ch, "enc" + std::to_string(d) + "_conv2");
    b.add_edge(n1, n2);
    prev = n2;
    enc_out[d] = n2;
  }
  return enc_out;
}

}  // namespace

Template build_unet_template(int depth, int base_width, int in_channels, int in_h, int in_w,
                             const LabelScheme& scheme) {
  check_depth(depth);
  Builder b("unet", in_channels, in_h, in_w, scheme);
  std::vector<int> enc_out = build_encoder(b, depth, base_width);

  int prev = enc_out[depth - 1];
  for (int d = depth - 2; d >= 0; --d) {
    int ch = base_width << d;
    int up = b.add_node(OpType::Up, d, ch, "up" + std::to_string(d));
    b.add_edge(prev, up);
    int n1 = b.add_node(OpType::Normal, d, ch, "dec" + std::to_string(d) + "_conv1");
    b.add_edge(up, n1);
    b.add_edge(enc_out[d], n1);  // skip concatenation
    int n2 = b.add_node(OpType::Normal, d, ch, "dec" + std::to_string(d) + "_conv2");
    b.add_edge(n1, n2);
    prev = n2;
  }
  return std::move(b.t);
}

namespace {

Template build_nested(int depth, int base_width, int in_channels, int in_h, int in_w,
                      const LabelScheme& scheme, bool dense) {
  check_depth(depth);
  Builder b(dense ? "unet++" : "unet+", in_channels, in_h, in_w, scheme);
  std::vector<int> enc_out = build_encoder(b, depth, base_width);

  // out[i][j]: output node of unit j at level i; column 0 is the encoder
  std::vector<std::vector<int>> out(depth);
  for (int i = 0; i < depth; ++i) out[i].push_back(enc_out[i]);

  for (int j = 1; j <= depth - 1; ++j) {
    for (int i = depth - 1 - j; i >= 0; --i) {
      int ch = base_width << i;
      std::string tag = std::to_string(i) + "_" + std::to_string(j);
      int up = b.add_node(OpType::Up, i, ch, "up" + tag);
      b.add_edge(out[i + 1][j - 1], up);
      int n1 = b.add_node(OpType::Normal, i, ch, "u" + tag + "_conv1");
      b.add_edge(up, n1);
      if (dense) {
        for (int k = 0; k < j; ++k) b.add_edge(out[i][k], n1);
      } else {
        b.add_edge(out[i][j - 1], n1);
      }
      int n2 = b.add_node(OpType::Normal, i, ch, "u" + tag + "_conv2");
      b.add_edge(n1, n2);
      out[i].push_back(n2);
    }
  }
  return std::move(b.t);
}

}  // namespace

Template build_unet_plus_template(int depth, int base_width, int in_channels, int in_h, int in_w,
                                  const LabelScheme& scheme) {
  return build_nested(depth, base_width, in_channels, in_h, in_w, scheme, false);
}

Template build_unet_plusplus_template(int depth, int base_width, int in_channels, int in_h,
                                      int in_w, const LabelScheme& scheme) {
  return build_nested(depth, base_width, in_channels, in_h, in_w, scheme, true);
}

BigInt space_size(const Template& t) {
  BigInt total = 1;
  for (const TemplateNode& node : t.nodes) total *= static_cast<int>(node.labels.size());
  return total;
}

FactorGraph to_factor_graph_skeleton(const Template& t) {
  std::vector<LabelSet> label_sets;
  label_sets.reserve(t.nodes.size());
  for (const TemplateNode& node : t.nodes) {
    LabelSet s;
    for (const ArchLabel& l : node.labels) {
      s.labels.push_back("k" + std::to_string(l.kernel) + "w" + width_tag(l.width));
    }
    label_sets.push_back(std::move(s));
  }

  std::vector<GraphEdge> edges;
  std::vector<PairTable> tables;
  for (const FlowEdge& e : t.edges) {
    int i = std::min(e.from, e.to);
    int j = std::max(e.from, e.to);
    edges.push_back({i, j});
    tables.emplace_back(label_sets[i].size(), label_sets[j].size());
  }
  return FactorGraph(std::move(label_sets), {}, std::move(edges), std::move(tables));
}

int label_index(const TemplateNode& node, int kernel, double width) {
  for (std::size_t k = 0; k < node.labels.size(); ++k) {
    if (node.labels[k].kernel == kernel && node.labels[k].width == width) {
      return static_cast<int>(k);
    }
  }
  return -1;
}

int resolved_channels(int base_channels, double width) {
  return std::max(1, static_cast<int>(std::floor(base_channels * width + 0.5)));
}

NetConfig decode(const Template& t, const Assignment& a) {
  if (a.size() != t.nodes.size()) {
    throw std::invalid_argument("assignment length does not match template node count");
  }
  NetConfig config;
  config.layers.resize(t.nodes.size());
  std::vector<std::vector<int>> preds = t.predecessors();
  for (int i = 0; i < t.num_nodes(); ++i) {
    const TemplateNode& node = t.nodes[i];
    if (a[i] < 0 || a[i] >= static_cast<int>(node.labels.size())) {
      throw std::invalid_argument("label " + std::to_string(a[i]) + " out of range for node " +
                                  node.name);
    }
    const ArchLabel& label = node.labels[a[i]];
    NetLayer& layer = config.layers[i];
    layer.op = node.op;
    layer.kernel = label.kernel;
    layer.width = label.width;
    layer.out_channels = resolved_channels(node.base_channels, label.width);
    layer.out_h = node.out_h;
    layer.out_w = node.out_w;
    if (preds[i].empty()) {
      layer.in_channels = t.in_channels;
    } else {
      layer.in_channels = 0;
      for (int p : preds[i]) layer.in_channels += config.layers[p].out_channels;
    }
  }
  return config;
}

std::uint64_t mac_count(const NetConfig& config) {
  std::uint64_t total = 0;
  for (const NetLayer& l : config.layers) {
    total += static_cast<std::uint64_t>(l.kernel) * l.kernel * l.in_channels * l.out_channels *
             l.out_h * l.out_w;
  }
  return total;
}

std::uint64_t mac_count_direct(const Template& t, const Assignment& a) {
  const int n = t.num_nodes();
  std::vector<int> out_ch(n);
  for (int i = 0; i < n; ++i) {
    const ArchLabel& label = t.nodes[i].labels[a[i]];
    out_ch[i] = resolved_channels(t.nodes[i].base_channels, label.width);
  }
  std::vector<std::uint64_t> in_ch(n, 0);
  std::vector<bool> has_pred(n, false);
  for (const FlowEdge& e : t.edges) {
    in_ch[e.to] += static_cast<std::uint64_t>(out_ch[e.from]);
    has_pred[e.to] = true;
  }
  std::uint64_t total = 0;
  for (int i = 0; i < n; ++i) {
    std::uint64_t cin = has_pred[i] ? in_ch[i] : static_cast<std::uint64_t>(t.in_channels);
    std::uint64_t k = static_cast<std::uint64_t>(t.nodes[i].labels[a[i]].kernel);
    total += k * k * cin * static_cast<std::uint64_t>(out_ch[i]) *
             static_cast<std::uint64_t>(t.nodes[i].out_h) *
             static_cast<std::uint64_t>(t.nodes[i].out_w);
  }
  return total;
}

void print_net_config(std::ostream& os, const Template& t, const NetConfig& config) {
  os << "net-config v1\n";
  os << "backbone " << t.backbone << "\n";
  os << "layers " << config.layers.size() << "\n";
  os << "# name op kernel width in_ch out_ch out_h out_w\n";
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const NetLayer& l = config.layers[i];
    os << t.nodes[i].name << " " << to_string(l.op) << " " << l.kernel << " " << width_tag(l.width)
       << " " << l.in_channels << " " << l.out_channels << " " << l.out_h << " " << l.out_w
       << "\n";
  }
  os << "macs " << mac_count(config) << "\n";
}

}  // namespace archmrf
