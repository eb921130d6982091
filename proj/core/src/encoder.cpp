#include "netsig/encoder.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <variant>

#include <fmt/format.h>

#include "netsig/error.hpp"
#include "netsig/util.hpp"

namespace netsig {

std::string_view to_string(FeatureType t) {
  switch (t) {
    case FeatureType::Numeric: return "numeric";
    case FeatureType::Categorical: return "categorical";
    case FeatureType::SetCardinality: return "set-cardinality";
    case FeatureType::BagOfTokens: return "bag-of-tokens";
  }
  return "?";
}

std::size_t FeatureSchema::numeric_count() const {
  return static_cast<std::size_t>(
      std::count_if(features.begin(), features.end(), [](const auto& f) { return is_numeric(f.type); }));
}

std::size_t FeatureSchema::categorical_count() const { return features.size() - numeric_count(); }

int FeatureSchema::slot(std::string_view feature) const {
  int numeric = 0, categorical = 0;
  for (const auto& f : features) {
    if (f.name == feature) return is_numeric(f.type) ? numeric : categorical;
    (is_numeric(f.type) ? numeric : categorical)++;
  }
  return -1;
}

const FeatureSpec* FeatureSchema::find(std::string_view feature) const {
  for (const auto& f : features) {
    if (f.name == feature) return &f;
  }
  return nullptr;
}

namespace {

using T = FeatureType;

FeatureSchema make_schema(PropertyKind kind) {
  switch (kind) {
    case PropertyKind::Acl:
      return {kind, "acl-features", kSchemaVersion,
              {{"entry_count", T::Numeric, {"rules"}},
               {"permit_fraction", T::Numeric, {"rules"}},
               {"distinct_prefix_count", T::SetCardinality, {"rules"}},
               {"wildcard_use", T::Numeric, {"rules"}},
               {"action_sequence_hash", T::Categorical, {"rules"}},
               {"referenced_object_count", T::SetCardinality, {"filter_refs"}},
               {"name_template_class", T::Categorical, {"name"}}}};
    case PropertyKind::RouteFilter:
      return {kind, "route-filter-features", kSchemaVersion,
              {{"entry_count", T::Numeric, {"rules"}},
               {"permit_fraction", T::Numeric, {"rules"}},
               {"distinct_prefix_count", T::SetCardinality, {"rules"}},
               {"mean_prefix_length", T::Numeric, {"rules"}},
               {"length_range_profile", T::Categorical, {"rules"}},
               {"action_sequence_hash", T::Categorical, {"rules"}},
               {"name_template_class", T::Categorical, {"name"}}}};
    case PropertyKind::Vrf:
      return {kind, "vrf-features", kSchemaVersion,
              {{"route_target_count", T::SetCardinality, {"import_targets", "export_targets"}},
               {"import_target_set", T::BagOfTokens, {"import_targets"}},
               {"export_target_set", T::BagOfTokens, {"export_targets"}},
               {"policy_reference_template", T::BagOfTokens, {"import_policies", "export_policies"}},
               {"referenced_object_count", T::SetCardinality, {"import_policies", "export_policies"}},
               {"rd_template", T::Categorical, {"rd"}},
               {"name_template_class", T::Categorical, {"name"}}}};
    case PropertyKind::RoutingPolicy:
      return {kind, "routing-policy-features", kSchemaVersion,
              {{"clause_count", T::Numeric, {"clause_count"}},
               {"match_count", T::SetCardinality, {"match_acls", "match_route_filters", "match_communities"}},
               {"local_preference", T::Numeric, {"local_preference"}},
               {"referenced_object_count", T::SetCardinality, {"match_acls", "match_route_filters", "calls"}},
               {"match_reference_template", T::BagOfTokens, {"match_acls", "match_route_filters", "calls"}},
               {"community_set", T::BagOfTokens, {"set_communities"}},
               {"final_action", T::Categorical, {"action"}},
               {"name_template_class", T::Categorical, {"name"}}}};
  }
  throw Error(ErrorCode::InvalidConfig, "unknown property kind");
}

// BGP default when a policy leaves local preference unset.
constexpr double kDefaultLocalPreference = 100.0;

using Value = std::variant<double, std::string>;

double checked_count(std::size_t n) {
  if (n > (std::size_t{1} << 32)) throw Error(ErrorCode::EncodingOverflow, fmt::format("count {}", n));
  return static_cast<double>(n);
}

std::string bag(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return std::string(kEmptyBagToken);
  std::vector<std::string> sorted = tokens;
  std::sort(sorted.begin(), sorted.end());
  return join(sorted, ",");
}

std::string bag(const TokenSet& tokens) { return bag(std::vector<std::string>(tokens.begin(), tokens.end())); }

const TokenSet& set_attr(const Property& p, const std::string& key) {
  static const TokenSet empty;
  const auto* s = p.attr<TokenSet>(key);
  return s ? *s : empty;
}

template <typename Rule>
std::string action_sequence(const std::vector<Rule>& rules) {
  std::string seq;
  for (const auto& r : rules) seq += r.action == Action::Permit ? 'P' : 'D';
  return fnv1a_hex(seq);
}

template <typename Rule>
double permit_fraction(const std::vector<Rule>& rules) {
  // An empty rule list permits nothing.
  if (rules.empty()) return 0.0;
  auto permits = std::count_if(rules.begin(), rules.end(), [](const Rule& r) { return r.action == Action::Permit; });
  return static_cast<double>(permits) / static_cast<double>(rules.size());
}

std::vector<Value> acl_values(const Property& p) {
  static const AclRuleList none;
  const auto* rules_ptr = p.attr<AclRuleList>("rules");
  const auto& rules = rules_ptr ? *rules_ptr : none;
  std::set<Prefix> prefixes;
  std::size_t wildcard = 0;
  for (const auto& r : rules) {
    bool any = false;
    for (const auto* ep : {&r.source, &r.destination}) {
      if (ep->type == Endpoint::Type::Prefix) prefixes.insert(ep->prefix);
      if (ep->type == Endpoint::Type::Any) any = true;
    }
    if (any) ++wildcard;
  }
  return {checked_count(rules.size()),
          permit_fraction(rules),
          checked_count(prefixes.size()),
          checked_count(wildcard),
          action_sequence(rules),
          checked_count(set_attr(p, "filter_refs").size()),
          digit_template(p.name)};
}

std::vector<Value> route_filter_values(const Property& p) {
  static const FilterRuleList none;
  const auto* rules_ptr = p.attr<FilterRuleList>("rules");
  const auto& rules = rules_ptr ? *rules_ptr : none;
  std::set<Prefix> prefixes;
  double length_sum = 0;
  std::vector<std::string> profile;
  for (const auto& r : rules) {
    prefixes.insert(r.prefix);
    length_sum += r.prefix.length;
    profile.push_back(fmt::format("{}[{}-{}]", r.prefix.length, r.ge ? std::to_string(*r.ge) : "",
                                  r.le ? std::to_string(*r.le) : ""));
  }
  return {checked_count(rules.size()),
          permit_fraction(rules),
          checked_count(prefixes.size()),
          rules.empty() ? 0.0 : length_sum / static_cast<double>(rules.size()),
          profile.empty() ? std::string(kEmptyBagToken) : join(profile, " "),
          action_sequence(rules),
          digit_template(p.name)};
}

std::vector<Value> vrf_values(const Property& p) {
  const auto& imports = set_attr(p, "import_targets");
  const auto& exports = set_attr(p, "export_targets");
  std::vector<std::string> policy_templates;
  TokenSet policies;
  for (const auto& n : set_attr(p, "import_policies")) {
    policy_templates.push_back("import:" + digit_template(n));
    policies.insert(n);
  }
  for (const auto& n : set_attr(p, "export_policies")) {
    policy_templates.push_back("export:" + digit_template(n));
    policies.insert(n);
  }
  const auto* rd = p.attr<std::string>("rd");
  return {checked_count(imports.size() + exports.size()),
          bag(imports),
          bag(exports),
          bag(policy_templates),
          checked_count(policies.size()),
          rd ? digit_template(*rd) : std::string(kMissingToken),
          digit_template(p.name)};
}

std::vector<Value> policy_values(const Property& p) {
  const auto& acls = set_attr(p, "match_acls");
  const auto& filters = set_attr(p, "match_route_filters");
  const auto& communities = set_attr(p, "match_communities");
  const auto& calls = set_attr(p, "calls");
  std::vector<std::string> templates;
  for (const auto& n : acls) templates.push_back("acl:" + digit_template(n));
  for (const auto& n : filters) templates.push_back("route-filter:" + digit_template(n));
  for (const auto& n : calls) templates.push_back("call:" + digit_template(n));
  const auto* clauses = p.attr<double>("clause_count");
  const auto* local_pref = p.attr<double>("local_preference");
  const auto* action = p.attr<std::string>("action");
  return {clauses ? *clauses : 0.0,
          checked_count(acls.size() + filters.size() + communities.size()),
          local_pref ? *local_pref : kDefaultLocalPreference,
          checked_count(acls.size() + filters.size() + calls.size()),
          bag(templates),
          bag(set_attr(p, "set_communities")),
          action ? *action : std::string(kMissingToken),
          digit_template(p.name)};
}

}  // namespace

const FeatureSchema& feature_schema(PropertyKind kind) {
  static const FeatureSchema schemas[] = {make_schema(PropertyKind::Acl), make_schema(PropertyKind::RouteFilter),
                                          make_schema(PropertyKind::Vrf), make_schema(PropertyKind::RoutingPolicy)};
  return schemas[static_cast<int>(kind)];
}

TokenTable::TokenTable(const TokenTable& other) {
  std::lock_guard lock(other.mutex_);
  tokens_ = other.tokens_;
  ids_ = other.ids_;
}

TokenTable& TokenTable::operator=(const TokenTable& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  tokens_ = other.tokens_;
  ids_ = other.ids_;
  return *this;
}

TokenId TokenTable::intern(std::string_view token) {
  std::lock_guard lock(mutex_);
  auto [it, inserted] = ids_.try_emplace(std::string(token), static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

const std::string& TokenTable::token(TokenId id) const {
  std::lock_guard lock(mutex_);
  return tokens_.at(id);
}

std::size_t TokenTable::size() const {
  std::lock_guard lock(mutex_);
  return tokens_.size();
}

FeatureVector encode(const Property& property, TokenTable& table) {
  std::vector<Value> values;
  switch (property.kind) {
    case PropertyKind::Acl: values = acl_values(property); break;
    case PropertyKind::RouteFilter: values = route_filter_values(property); break;
    case PropertyKind::Vrf: values = vrf_values(property); break;
    case PropertyKind::RoutingPolicy: values = policy_values(property); break;
  }
  const auto& schema = feature_schema(property.kind);
  FeatureVector v;
  v.property_id = property.id;
  v.kind = property.kind;
  v.schema_version = schema.version;
  v.numeric.reserve(schema.numeric_count());
  v.categorical.reserve(schema.categorical_count());
  for (std::size_t i = 0; i < schema.features.size(); ++i) {
    if (is_numeric(schema.features[i].type)) {
      v.numeric.push_back(std::get<double>(values[i]));
    } else {
      v.categorical.push_back(table.intern(std::get<std::string>(values[i])));
    }
  }
  return v;
}

const std::vector<std::string>& provenance(const FeatureVector& vector, std::string_view feature) {
  const auto* spec = feature_schema(vector.kind).find(feature);
  if (!spec) throw Error(ErrorCode::SchemaMismatch, std::string(feature));
  return spec->sources;
}

}  // namespace netsig
