#include "netsig/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace netsig {

namespace {

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':' || c == '/';
  });
}

std::optional<long> parse_int(std::string_view s) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint32_t> parse_ipv4(std::string_view s) {
  std::uint32_t addr = 0;
  int octets = 0;
  std::size_t pos = 0;
  while (octets < 4) {
    std::size_t dot = s.find('.', pos);
    auto part = s.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
    auto v = parse_int(part);
    if (!v || *v < 0 || *v > 255 || part.empty()) return std::nullopt;
    addr = (addr << 8) | static_cast<std::uint32_t>(*v);
    ++octets;
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  if (octets != 4 || s.find('.', pos) != std::string_view::npos) return std::nullopt;
  return addr;
}

std::optional<Action> parse_action(std::string_view s) {
  if (s == "permit") return Action::Permit;
  if (s == "deny") return Action::Deny;
  return std::nullopt;
}

std::uint32_t mask_of(int length) {
  return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
}

// Parses one endpoint starting at values[i]; advances i past it.
std::optional<Endpoint> parse_endpoint(const std::vector<std::string>& values, std::size_t& i) {
  if (i >= values.size()) return std::nullopt;
  const std::string& tok = values[i];
  Endpoint ep;
  if (tok == "any") {
    ep.type = Endpoint::Type::Any;
    i += 1;
    return ep;
  }
  if (tok == "host" || tok == "filter") {
    if (i + 1 >= values.size()) return std::nullopt;
    if (tok == "host") {
      auto addr = parse_ipv4(values[i + 1]);
      if (!addr) return std::nullopt;
      ep.type = Endpoint::Type::Prefix;
      ep.prefix = Prefix{*addr, 32};
    } else {
      if (!valid_name(values[i + 1])) return std::nullopt;
      ep.type = Endpoint::Type::Filter;
      ep.filter = values[i + 1];
    }
    i += 2;
    return ep;
  }
  auto p = parse_prefix(tok);
  if (!p) return std::nullopt;
  ep.type = Endpoint::Type::Prefix;
  ep.prefix = *p;
  i += 1;
  return ep;
}

bool endpoint_covers(const Endpoint& earlier, const Endpoint& later) {
  switch (earlier.type) {
    case Endpoint::Type::Any:
      return true;
    case Endpoint::Type::Prefix:
      if (later.type == Endpoint::Type::Prefix) return earlier.prefix.contains(later.prefix);
      if (later.type == Endpoint::Type::Any) return earlier.prefix.length == 0;
      return false;
    case Endpoint::Type::Filter:
      return later.type == Endpoint::Type::Filter && later.filter == earlier.filter;
  }
  return false;
}

bool one_name(const Entry& e) { return e.values.size() == 1 && valid_name(e.values[0]); }

}  // namespace

bool is_valid_name(std::string_view s) { return valid_name(s); }

std::string_view to_string(StanzaKind kind) {
  switch (kind) {
    case StanzaKind::Acl: return "acl";
    case StanzaKind::RouteFilter: return "route-filter";
    case StanzaKind::Vrf: return "vrf";
    case StanzaKind::RoutingPolicy: return "routing-policy";
    case StanzaKind::Interface: return "interface";
    case StanzaKind::BgpNeighbor: return "bgp-neighbor";
  }
  return "?";
}

std::optional<StanzaKind> stanza_kind_from_string(std::string_view s) {
  for (auto k : {StanzaKind::Acl, StanzaKind::RouteFilter, StanzaKind::Vrf,
                 StanzaKind::RoutingPolicy, StanzaKind::Interface, StanzaKind::BgpNeighbor}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Action a) { return a == Action::Permit ? "permit" : "deny"; }

bool Prefix::contains(const Prefix& other) const {
  if (other.length < length) return false;
  const auto m = mask_of(length);
  return (address & m) == (other.address & m);
}

std::string Prefix::str() const {
  return fmt::format("{}.{}.{}.{}/{}", address >> 24, (address >> 16) & 0xff,
                     (address >> 8) & 0xff, address & 0xff, length);
}

std::optional<Prefix> parse_prefix(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto addr = parse_ipv4(text.substr(0, slash));
  auto len = parse_int(text.substr(slash + 1));
  if (!addr || !len || *len < 0 || *len > 32) return std::nullopt;
  return Prefix{*addr, static_cast<int>(*len)};
}

bool AclRule::covers(const AclRule& later) const {
  if (protocol != "ip" && protocol != later.protocol) return false;
  if (port && (!later.port || *port != *later.port)) return false;
  return endpoint_covers(source, later.source) && endpoint_covers(destination, later.destination);
}

std::optional<AclRule> parse_acl_rule(const Entry& entry) {
  auto action = parse_action(entry.key);
  if (!action || entry.values.empty()) return std::nullopt;
  AclRule rule;
  rule.action = *action;
  rule.protocol = entry.values[0];
  if (!valid_name(rule.protocol)) return std::nullopt;
  std::size_t i = 1;
  auto src = parse_endpoint(entry.values, i);
  if (!src) return std::nullopt;
  auto dst = parse_endpoint(entry.values, i);
  if (!dst) return std::nullopt;
  rule.source = std::move(*src);
  rule.destination = std::move(*dst);
  if (i < entry.values.size()) {
    if (entry.values[i] != "eq" || i + 2 != entry.values.size()) return std::nullopt;
    rule.port = entry.values[i + 1];
  }
  return rule;
}

std::optional<FilterRule> parse_filter_rule(const Entry& entry) {
  auto action = parse_action(entry.key);
  if (!action || entry.values.empty()) return std::nullopt;
  auto prefix = parse_prefix(entry.values[0]);
  if (!prefix) return std::nullopt;
  FilterRule rule{*action, *prefix, std::nullopt, std::nullopt};
  for (std::size_t i = 1; i < entry.values.size(); i += 2) {
    if (i + 1 >= entry.values.size()) return std::nullopt;
    auto v = parse_int(entry.values[i + 1]);
    if (!v || *v < prefix->length || *v > 32) return std::nullopt;
    if (entry.values[i] == "ge" && !rule.ge) {
      rule.ge = static_cast<int>(*v);
    } else if (entry.values[i] == "le" && !rule.le) {
      rule.le = static_cast<int>(*v);
    } else {
      return std::nullopt;
    }
  }
  if (rule.ge && rule.le && *rule.ge > *rule.le) return std::nullopt;
  return rule;
}

EntryCheck check_entry(StanzaKind kind, const Entry& e) {
  const auto& k = e.key;
  if (k == "description" || k == "remark") return EntryCheck::Ok;
  auto verdict = [](bool ok) { return ok ? EntryCheck::Ok : EntryCheck::Malformed; };
  switch (kind) {
    case StanzaKind::Acl:
      if (parse_action(k)) return verdict(parse_acl_rule(e).has_value());
      return EntryCheck::UnknownKey;
    case StanzaKind::RouteFilter:
      if (parse_action(k)) return verdict(parse_filter_rule(e).has_value());
      return EntryCheck::UnknownKey;
    case StanzaKind::Vrf:
      if (k == "rd") return verdict(one_name(e));
      if (k == "route-target")
        return verdict(e.values.size() == 2 &&
                       (e.values[0] == "import" || e.values[0] == "export") &&
                       valid_name(e.values[1]));
      if (k == "import-policy" || k == "export-policy") return verdict(one_name(e));
      return EntryCheck::UnknownKey;
    case StanzaKind::RoutingPolicy:
      if (k == "match")
        return verdict(e.values.size() == 2 &&
                       (e.values[0] == "acl" || e.values[0] == "route-filter" ||
                        e.values[0] == "community") &&
                       valid_name(e.values[1]));
      if (k == "set") {
        if (e.values.size() != 2) return EntryCheck::Malformed;
        if (e.values[0] == "local-preference" || e.values[0] == "med")
          return verdict(parse_int(e.values[1]).has_value());
        if (e.values[0] == "community") return verdict(valid_name(e.values[1]));
        return EntryCheck::Malformed;
      }
      if (k == "call") return verdict(one_name(e));
      if (k == "action") return verdict(e.values.size() == 1 && parse_action(e.values[0]));
      return EntryCheck::UnknownKey;
    case StanzaKind::Interface:
      if (k == "vrf" || k == "acl-in" || k == "acl-out") return verdict(one_name(e));
      if (k == "address") return verdict(e.values.size() == 1 && parse_prefix(e.values[0]));
      if (k == "shutdown") return verdict(e.values.empty());
      return EntryCheck::UnknownKey;
    case StanzaKind::BgpNeighbor:
      if (k == "remote-as") return verdict(e.values.size() == 1 && parse_int(e.values[0]));
      if (k == "import-policy" || k == "export-policy" || k == "vrf") return verdict(one_name(e));
      return EntryCheck::UnknownKey;
  }
  return EntryCheck::UnknownKey;
}

std::vector<EntryReference> entry_references(StanzaKind kind, const Entry& e) {
  std::vector<EntryReference> refs;
  switch (kind) {
    case StanzaKind::Acl:
      if (auto rule = parse_acl_rule(e)) {
        for (const auto* ep : {&rule->source, &rule->destination}) {
          if (ep->type == Endpoint::Type::Filter)
            refs.push_back({StanzaKind::RouteFilter, ep->filter});
        }
      }
      break;
    case StanzaKind::RouteFilter:
      break;
    case StanzaKind::Vrf:
      if ((e.key == "import-policy" || e.key == "export-policy") && e.values.size() == 1)
        refs.push_back({StanzaKind::RoutingPolicy, e.values[0]});
      break;
    case StanzaKind::RoutingPolicy:
      if (e.key == "match" && e.values.size() == 2) {
        if (e.values[0] == "acl") refs.push_back({StanzaKind::Acl, e.values[1]});
        if (e.values[0] == "route-filter") refs.push_back({StanzaKind::RouteFilter, e.values[1]});
      } else if (e.key == "call" && e.values.size() == 1) {
        refs.push_back({StanzaKind::RoutingPolicy, e.values[0]});
      }
      break;
    case StanzaKind::Interface:
      if (e.values.size() == 1) {
        if (e.key == "vrf") refs.push_back({StanzaKind::Vrf, e.values[0]});
        if (e.key == "acl-in" || e.key == "acl-out") refs.push_back({StanzaKind::Acl, e.values[0]});
      }
      break;
    case StanzaKind::BgpNeighbor:
      if (e.values.size() == 1) {
        if (e.key == "import-policy" || e.key == "export-policy")
          refs.push_back({StanzaKind::RoutingPolicy, e.values[0]});
        if (e.key == "vrf") refs.push_back({StanzaKind::Vrf, e.values[0]});
      }
      break;
  }
  return refs;
}

}  // namespace netsig
