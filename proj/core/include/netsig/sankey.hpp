#pragma once

#include <string>
#include <vector>

#include "netsig/detectors.hpp"

namespace netsig {

// Layer 0: property kind. Layer 1: deviation category. Layer 2: problem type.
struct SankeyNode {
  std::string name;
  int layer = 0;
  bool operator==(const SankeyNode&) const = default;
};

struct SankeyLink {
  std::size_t source = 0;  // index into nodes
  std::size_t target = 0;
  std::size_t value = 0;
  bool operator==(const SankeyLink&) const = default;
};

struct SankeyFlow {
  std::vector<SankeyNode> nodes;  // sorted by (layer, name)
  std::vector<SankeyLink> links;  // sorted by (source, target)

  // Total weight of links leaving layer 0 (layer == 0) or entering `layer` (layer 1, 2).
  std::size_t layer_total(int layer) const;
};

// numeric-deviation, categorical-deviation, missing-reference or order-anomaly,
// from the finding's strongest deviant feature.
std::string deviation_category(const Finding& finding);

SankeyFlow build_sankey(const std::vector<Finding>& findings);

}  // namespace netsig
