#include "netsig/properties.hpp"

#include <algorithm>
#include <charconv>
#include <deque>

#include <fmt/format.h>

#include "netsig/error.hpp"

namespace netsig {

std::string_view to_string(PropertyKind kind) {
  switch (kind) {
    case PropertyKind::Acl: return "acl";
    case PropertyKind::RouteFilter: return "route-filter";
    case PropertyKind::Vrf: return "vrf";
    case PropertyKind::RoutingPolicy: return "routing-policy";
  }
  return "?";
}

std::optional<PropertyKind> property_kind_from_string(std::string_view s) {
  for (auto k : kAllPropertyKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<PropertyKind> property_kind_of(StanzaKind kind) {
  switch (kind) {
    case StanzaKind::Acl: return PropertyKind::Acl;
    case StanzaKind::RouteFilter: return PropertyKind::RouteFilter;
    case StanzaKind::Vrf: return PropertyKind::Vrf;
    case StanzaKind::RoutingPolicy: return PropertyKind::RoutingPolicy;
    default: return std::nullopt;
  }
}

StanzaKind stanza_kind_of(PropertyKind kind) {
  switch (kind) {
    case PropertyKind::Acl: return StanzaKind::Acl;
    case PropertyKind::RouteFilter: return StanzaKind::RouteFilter;
    case PropertyKind::Vrf: return StanzaKind::Vrf;
    case PropertyKind::RoutingPolicy: return StanzaKind::RoutingPolicy;
  }
  return StanzaKind::Acl;
}

std::string property_id(std::string_view device, StanzaKind kind, std::string_view name) {
  return fmt::format("{}/{}/{}", device, to_string(kind), name);
}

namespace {

double to_number(const std::string& s) {
  long v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return static_cast<double>(v);
}

void extract_attributes(const Stanza& st, Property& p) {
  auto& attrs = p.attributes;
  switch (p.kind) {
    case PropertyKind::Acl: {
      AclRuleList rules;
      TokenSet refs;
      for (const auto& e : st.entries) {
        if (auto rule = parse_acl_rule(e)) {
          for (const auto* ep : {&rule->source, &rule->destination}) {
            if (ep->type == Endpoint::Type::Filter) refs.insert(ep->filter);
          }
          rules.push_back(std::move(*rule));
        }
      }
      attrs["rules"] = std::move(rules);
      attrs["filter_refs"] = std::move(refs);
      break;
    }
    case PropertyKind::RouteFilter: {
      FilterRuleList rules;
      for (const auto& e : st.entries) {
        if (auto rule = parse_filter_rule(e)) rules.push_back(*rule);
      }
      attrs["rules"] = std::move(rules);
      break;
    }
    case PropertyKind::Vrf: {
      TokenSet imports, exports, import_policies, export_policies;
      for (const auto& e : st.entries) {
        if (e.key == "rd") attrs["rd"] = e.values[0];
        if (e.key == "route-target") (e.values[0] == "import" ? imports : exports).insert(e.values[1]);
        if (e.key == "import-policy") import_policies.insert(e.values[0]);
        if (e.key == "export-policy") export_policies.insert(e.values[0]);
      }
      attrs["import_targets"] = std::move(imports);
      attrs["export_targets"] = std::move(exports);
      attrs["import_policies"] = std::move(import_policies);
      attrs["export_policies"] = std::move(export_policies);
      break;
    }
    case PropertyKind::RoutingPolicy: {
      TokenSet match_acls, match_filters, match_communities, calls, set_communities;
      double clauses = 0;
      std::string action = "permit";
      for (const auto& e : st.entries) {
        if (e.key == "description" || e.key == "remark") continue;
        clauses += 1;
        if (e.key == "match") {
          if (e.values[0] == "acl") match_acls.insert(e.values[1]);
          if (e.values[0] == "route-filter") match_filters.insert(e.values[1]);
          if (e.values[0] == "community") match_communities.insert(e.values[1]);
        } else if (e.key == "set") {
          if (e.values[0] == "local-preference") attrs["local_preference"] = to_number(e.values[1]);
          if (e.values[0] == "med") attrs["med"] = to_number(e.values[1]);
          if (e.values[0] == "community") set_communities.insert(e.values[1]);
        } else if (e.key == "call") {
          calls.insert(e.values[0]);
        } else if (e.key == "action") {
          action = e.values[0];
        }
      }
      attrs["clause_count"] = clauses;
      attrs["match_acls"] = std::move(match_acls);
      attrs["match_route_filters"] = std::move(match_filters);
      attrs["match_communities"] = std::move(match_communities);
      attrs["calls"] = std::move(calls);
      attrs["set_communities"] = std::move(set_communities);
      attrs["action"] = action;
      break;
    }
  }
}

}  // namespace

std::vector<Property> extract_properties(const NetworkSnapshot& snapshot) {
  std::vector<Property> out;
  for (const auto& [device, dev] : snapshot.devices) {
    for (std::size_t i = 0; i < dev.stanzas.size(); ++i) {
      const Stanza& st = dev.stanzas[i];
      auto kind = property_kind_of(st.kind);
      if (!kind) continue;
      Property p;
      p.id = property_id(device, st.kind, st.name);
      p.kind = *kind;
      p.device = device;
      p.name = st.name;
      p.source = {dev.source_path, dev.line_index[i]};
      for (const auto& e : st.entries) {
        for (auto& r : entry_references(st.kind, e)) {
          p.references.push_back({r.target, std::move(r.name), e.line});
        }
      }
      extract_attributes(st, p);
      out.push_back(std::move(p));
    }
  }
  return out;
}

bool ReferenceGraph::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

bool ReferenceGraph::has_dangling(std::string_view from) const {
  return dangling_by_from_.count(std::string(from)) > 0;
}

std::vector<DanglingRef> ReferenceGraph::dangling_from(std::string_view from) const {
  std::vector<DanglingRef> out;
  auto it = dangling_by_from_.find(std::string(from));
  if (it == dangling_by_from_.end()) return out;
  for (auto i : it->second) out.push_back(dangling_[i]);
  return out;
}

std::vector<std::string> ReferenceGraph::dependents(std::string_view id) const {
  std::vector<std::string> out;
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return out;
  for (auto i : reverse_[it->second]) out.push_back(nodes_[i]);
  return out;
}

ReferenceGraph make_reference_graph(std::vector<std::string> nodes, std::vector<RefEdge> edges,
                                    std::vector<DanglingRef> dangling) {
  ReferenceGraph g;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  g.nodes_ = std::move(nodes);
  for (std::size_t i = 0; i < g.nodes_.size(); ++i) g.index_.emplace(g.nodes_[i], i);
  g.reverse_.resize(g.nodes_.size());
  for (const auto& e : edges) {
    auto from = g.index_.find(e.from);
    auto to = g.index_.find(e.to);
    if (from == g.index_.end() || to == g.index_.end()) {
      throw Error(ErrorCode::UnknownProperty, fmt::format("edge {} -> {}", e.from, e.to));
    }
    g.reverse_[to->second].push_back(from->second);
  }
  for (auto& rev : g.reverse_) {
    std::sort(rev.begin(), rev.end());
    rev.erase(std::unique(rev.begin(), rev.end()), rev.end());
  }
  g.edges_ = std::move(edges);
  g.dangling_ = std::move(dangling);
  for (std::size_t i = 0; i < g.dangling_.size(); ++i) {
    g.dangling_by_from_[g.dangling_[i].from].push_back(i);
  }
  return g;
}

ReferenceGraph build_reference_graph(const NetworkSnapshot& snapshot,
                                     const std::vector<Property>& /*properties*/) {
  // Property ids are stanza ids, so every stanza (property or reference target) becomes a node.
  std::vector<std::string> nodes;
  // (kind, name) -> devices defining it, in lexicographic device order.
  std::map<std::pair<StanzaKind, std::string>, std::vector<std::string>> definitions;
  for (const auto& [device, dev] : snapshot.devices) {
    for (const auto& st : dev.stanzas) {
      nodes.push_back(property_id(device, st.kind, st.name));
      definitions[{st.kind, st.name}].push_back(device);
    }
  }

  std::vector<RefEdge> edges;
  std::vector<DanglingRef> dangling;
  for (const auto& [device, dev] : snapshot.devices) {
    for (const auto& st : dev.stanzas) {
      const std::string from = property_id(device, st.kind, st.name);
      for (const auto& e : st.entries) {
        for (const auto& ref : entry_references(st.kind, e)) {
          const RefSite site{dev.source_path, e.line};
          auto def = definitions.find({ref.target, ref.name});
          std::optional<std::string> target_device;
          if (def != definitions.end()) {
            const auto& devs = def->second;
            if (std::binary_search(devs.begin(), devs.end(), device)) {
              target_device = device;
            } else if (ref.target == StanzaKind::RouteFilter || ref.target == StanzaKind::RoutingPolicy) {
              target_device = devs.front();
            }
          }
          if (target_device) {
            edges.push_back({from, property_id(*target_device, ref.target, ref.name), site});
          } else {
            dangling.push_back({from, ref.name, ref.target, site});
          }
        }
      }
    }
  }
  return make_reference_graph(std::move(nodes), std::move(edges), std::move(dangling));
}

std::size_t blast_radius(const ReferenceGraph& graph, std::string_view id) {
  auto it = graph.index_.find(std::string(id));
  if (it == graph.index_.end()) throw Error(ErrorCode::UnknownProperty, std::string(id));
  std::vector<char> seen(graph.nodes_.size(), 0);
  std::deque<std::size_t> queue{it->second};
  seen[it->second] = 1;
  std::size_t count = 0;
  while (!queue.empty()) {
    auto n = queue.front();
    queue.pop_front();
    for (auto m : graph.reverse_[n]) {
      if (!seen[m]) {
        seen[m] = 1;
        ++count;
        queue.push_back(m);
      }
    }
  }
  return count;
}

}  // namespace netsig
