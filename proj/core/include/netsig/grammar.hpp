#pragma once

// Token-level grammar for the entries inside each stanza kind. The stanza
// layer (ingest.hpp) validates entries with these helpers, and the property
// extractor re-reads validated entries through them.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netsig {

enum class StanzaKind { Acl, RouteFilter, Vrf, RoutingPolicy, Interface, BgpNeighbor };

std::string_view to_string(StanzaKind kind);
std::optional<StanzaKind> stanza_kind_from_string(std::string_view s);

// Identifier charset for stanza and reference names: [A-Za-z0-9_.:/-]+
bool is_valid_name(std::string_view s);

struct Entry {
  std::string key;
  std::vector<std::string> values;
  int line = 0;  // 1-based source line; 0 when synthesized

  bool operator==(const Entry& o) const { return key == o.key && values == o.values; }
};

struct Prefix {
  std::uint32_t address = 0;
  int length = 0;

  bool contains(const Prefix& other) const;
  std::string str() const;
  bool operator==(const Prefix&) const = default;
  auto operator<=>(const Prefix&) const = default;
};

std::optional<Prefix> parse_prefix(std::string_view text);

enum class Action { Permit, Deny };
std::string_view to_string(Action a);

struct Endpoint {
  enum class Type { Any, Prefix, Filter };
  Type type = Type::Any;
  Prefix prefix;       // Type::Prefix (host addresses are /32)
  std::string filter;  // Type::Filter: name of a route-filter used as a prefix set
  bool operator==(const Endpoint&) const = default;
};

struct AclRule {
  Action action = Action::Permit;
  std::string protocol;
  Endpoint source;
  Endpoint destination;
  std::optional<std::string> port;

  // True when every packet matched by `later` is also matched by this rule.
  bool covers(const AclRule& later) const;
  bool operator==(const AclRule&) const = default;
};

struct FilterRule {
  Action action = Action::Permit;
  Prefix prefix;
  std::optional<int> ge;
  std::optional<int> le;
  bool operator==(const FilterRule&) const = default;
};

std::optional<AclRule> parse_acl_rule(const Entry& entry);
std::optional<FilterRule> parse_filter_rule(const Entry& entry);

enum class EntryCheck { Ok, UnknownKey, Malformed };

// Validates one entry against the grammar of the enclosing stanza kind.
EntryCheck check_entry(StanzaKind kind, const Entry& entry);

// A name referenced from an entry, with the kind of object it must resolve to.
struct EntryReference {
  StanzaKind target;
  std::string name;
  bool operator==(const EntryReference&) const = default;
};

std::vector<EntryReference> entry_references(StanzaKind kind, const Entry& entry);

}  // namespace netsig
