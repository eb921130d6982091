#include "netsig/sankey.hpp"

#include <algorithm>
#include <map>

namespace netsig {

std::string deviation_category(const Finding& finding) {
  const DeviantFeature* top = nullptr;
  for (const auto& d : finding.deviant_features) {
    if (!top || d.deviation > top->deviation) top = &d;
  }
  if (!top) return "numeric-deviation";
  const auto& name = top->feature;
  if (name == "action_sequence_hash" || name == "length_range_profile") return "order-anomaly";
  if (name.find("reference") != std::string::npos) return "missing-reference";
  return top->numeric ? "numeric-deviation" : "categorical-deviation";
}

std::size_t SankeyFlow::layer_total(int layer) const {
  std::size_t total = 0;
  for (const auto& l : links) {
    const int from = nodes[l.source].layer;
    if ((layer == 0 && from == 0) || (layer > 0 && from == layer - 1)) total += l.value;
  }
  return total;
}

SankeyFlow build_sankey(const std::vector<Finding>& findings) {
  using Key = std::pair<int, std::string>;
  std::map<std::pair<Key, Key>, std::size_t> counts;
  std::map<Key, std::size_t> node_index;
  for (const auto& f : findings) {
    const Key kind{0, std::string(to_string(f.kind))};
    const Key category{1, deviation_category(f)};
    const Key problem{2, std::string(to_string(f.problem_type))};
    ++counts[{kind, category}];
    ++counts[{category, problem}];
    node_index[kind];
    node_index[category];
    node_index[problem];
  }
  SankeyFlow flow;
  for (auto& [key, idx] : node_index) {
    idx = flow.nodes.size();
    flow.nodes.push_back({key.second, key.first});
  }
  for (const auto& [edge, value] : counts) {
    flow.links.push_back({node_index.at(edge.first), node_index.at(edge.second), value});
  }
  std::sort(flow.links.begin(), flow.links.end(),
            [](const SankeyLink& a, const SankeyLink& b) { return std::tie(a.source, a.target) < std::tie(b.source, b.target); });
  return flow;
}

}  // namespace netsig
