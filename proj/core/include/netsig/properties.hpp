#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "netsig/grammar.hpp"
#include "netsig/ingest.hpp"

namespace netsig {

enum class PropertyKind { Acl, RouteFilter, Vrf, RoutingPolicy };

inline constexpr PropertyKind kAllPropertyKinds[] = {PropertyKind::Acl, PropertyKind::RouteFilter,
                                                     PropertyKind::Vrf, PropertyKind::RoutingPolicy};

std::string_view to_string(PropertyKind kind);
std::optional<PropertyKind> property_kind_from_string(std::string_view s);
std::optional<PropertyKind> property_kind_of(StanzaKind kind);
StanzaKind stanza_kind_of(PropertyKind kind);

using TokenSet = std::set<std::string>;
using AclRuleList = std::vector<AclRule>;
using FilterRuleList = std::vector<FilterRule>;
using PrefixList = std::vector<Prefix>;
using AttrValue = std::variant<double, std::string, TokenSet, Prefix, PrefixList, AclRuleList, FilterRuleList>;

struct SourceLocation {
  std::string file;
  LineRange lines;
  bool operator==(const SourceLocation&) const = default;
};

struct PropertyReference {
  StanzaKind target;
  std::string name;
  int line = 0;
  bool operator==(const PropertyReference&) const = default;
};

struct Property {
  std::string id;  // "<device>/<kind>/<name>"
  PropertyKind kind = PropertyKind::Acl;
  std::string device;
  std::string name;
  std::map<std::string, AttrValue> attributes;
  std::vector<PropertyReference> references;  // in entry order
  SourceLocation source;

  template <typename T>
  const T* attr(const std::string& key) const {
    auto it = attributes.find(key);
    return it == attributes.end() ? nullptr : std::get_if<T>(&it->second);
  }
  bool operator==(const Property&) const = default;
};

std::string property_id(std::string_view device, StanzaKind kind, std::string_view name);

std::vector<Property> extract_properties(const NetworkSnapshot& snapshot);

struct RefSite {
  std::string file;
  int line = 0;
  bool operator==(const RefSite&) const = default;
};

struct RefEdge {
  std::string from;
  std::string to;
  RefSite site;
  bool operator==(const RefEdge&) const = default;
};

struct DanglingRef {
  std::string from;
  std::string missing_name;
  StanzaKind target = StanzaKind::Acl;
  RefSite site;
  bool operator==(const DanglingRef&) const = default;
};

class ReferenceGraph {
 public:
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<RefEdge>& edges() const { return edges_; }
  const std::vector<DanglingRef>& dangling() const { return dangling_; }

  bool contains(std::string_view id) const;
  bool has_dangling(std::string_view from) const;
  std::vector<DanglingRef> dangling_from(std::string_view from) const;

  // Ids of nodes with a "uses" edge into `id`.
  std::vector<std::string> dependents(std::string_view id) const;

 private:
  friend ReferenceGraph make_reference_graph(std::vector<std::string>, std::vector<RefEdge>,
                                             std::vector<DanglingRef>);
  friend std::size_t blast_radius(const ReferenceGraph&, std::string_view);

  std::vector<std::string> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<RefEdge> edges_;
  std::vector<DanglingRef> dangling_;
  std::vector<std::vector<std::size_t>> reverse_;  // node -> nodes using it
  std::unordered_map<std::string, std::vector<std::size_t>> dangling_by_from_;
};

// Names resolve on the referring device first; route filters and routing
// policies fall back to the lexicographically first device defining them.
ReferenceGraph build_reference_graph(const NetworkSnapshot& snapshot,
                                     const std::vector<Property>& properties);

// Number of distinct transitive dependents of `id`, excluding itself.
std::size_t blast_radius(const ReferenceGraph& graph, std::string_view id);

// Test/benchmark hook: a graph over explicit nodes and edges.
ReferenceGraph make_reference_graph(std::vector<std::string> nodes, std::vector<RefEdge> edges,
                                    std::vector<DanglingRef> dangling = {});

}  // namespace netsig
