#include "netsig/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "netsig/error.hpp"
#include "netsig/util.hpp"

namespace netsig {

namespace {

// Device-specific octet placeholder inside template entry text.
constexpr std::string_view kSite = "{S}";

const std::vector<std::string> kWords = {"MGMT",   "EDGE",  "VTY",  "CUSTOMER", "PARTNER", "GUEST", "VOICE",
                                         "DMZ",    "BACKUP", "NTP", "SNMP",     "LAB",     "CORE",  "TRANSIT",
                                         "PEERING", "INFRA", "WAN",  "STORAGE",  "CAMPUS",  "VIDEO"};
const std::vector<std::string> kProtocols = {"ip", "tcp", "udp"};
const std::vector<std::string> kPorts = {"22", "23", "53", "80", "123", "161", "443", "514"};
const std::vector<std::string> kPublicBlocks = {"172.16.0.0/12", "192.168.0.0/16", "100.64.0.0/10", "198.51.100.0/24",
                                                "203.0.113.0/24"};

std::string kind_prefix(PropertyKind k) {
  switch (k) {
    case PropertyKind::Acl: return "ACL_";
    case PropertyKind::RouteFilter: return "RF_";
    case PropertyKind::Vrf: return "VRF_";
    case PropertyKind::RoutingPolicy: return "RP_";
  }
  return "X_";
}

// Names are distinguished by letters only so digit templating keeps templates apart.
std::string letter_suffix(std::size_t n) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('A' + n % 26));
    n /= 26;
  } while (n-- > 0);
  return s;
}

std::string base_name(PropertyKind k, std::size_t t) {
  std::string word = kWords[t % kWords.size()];
  if (t >= kWords.size()) word += "_" + letter_suffix(t / kWords.size() - 1);
  return kind_prefix(k) + word;
}

std::string substitute_site(std::string_view text, std::size_t site) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto hit = text.find(kSite, pos);
    out.append(text.substr(pos, hit - pos));
    if (hit == std::string_view::npos) break;
    out += std::to_string(site);
    pos = hit + kSite.size();
  }
  return out;
}

Entry to_entry(const std::string& line) {
  auto tokens = split_ws(line);
  Entry e;
  e.key = tokens.front();
  e.values.assign(tokens.begin() + 1, tokens.end());
  return e;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
}

bool acl_lines_shadowed(const std::vector<std::string>& lines) {
  std::vector<AclRule> rules;
  for (const auto& l : lines) {
    auto r = parse_acl_rule(to_entry(l));
    if (r) rules.push_back(*r);
  }
  for (std::size_t j = 0; j < rules.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (rules[i].action != rules[j].action && rules[i].covers(rules[j])) return true;
    }
  }
  return false;
}

struct Template {
  std::string base;
  std::vector<std::string> lines;  // entry text with {S} placeholders
};

struct Names {
  std::map<PropertyKind, std::vector<std::string>> bases;
  std::string first_instance(PropertyKind k, std::size_t t) const { return bases.at(k)[t] + "_1"; }
};

std::string site_prefix(Rng& rng, int len) {
  const auto o3 = rng.uniform_int(0, 199);
  switch (len) {
    case 16: return "10.{S}.0.0/16";
    case 24: return fmt::format("10.{{S}}.{}.0/24", o3);
    default: return fmt::format("10.{{S}}.{}.{}/28", o3, rng.uniform_int(0, 15) * 16);
  }
}

std::string acl_endpoint(Rng& rng, bool source, const Names& names, std::size_t rf_templates) {
  const double u = rng.uniform01();
  if (source) {
    if (u < 0.6) return site_prefix(rng, pick(rng, std::vector<int>{16, 24, 28}));
    if (u < 0.75) return fmt::format("host 10.{{S}}.{}.{}", rng.uniform_int(0, 199), rng.uniform_int(1, 254));
    if (u < 0.9 || rf_templates == 0) return "any";
    return "filter " + names.first_instance(PropertyKind::RouteFilter,
                                            static_cast<std::size_t>(rng.uniform_int(0, rf_templates - 1)));
  }
  if (u < 0.4) return "any";
  if (u < 0.7) return site_prefix(rng, pick(rng, std::vector<int>{16, 24}));
  if (u < 0.9) return fmt::format("192.168.{}.0/24", rng.uniform_int(0, 255));
  return fmt::format("host 10.{{S}}.{}.{}", rng.uniform_int(0, 199), rng.uniform_int(1, 254));
}

Template make_acl(Rng& rng, std::string base, const Names& names, std::size_t rf_templates, bool large) {
  Template t{std::move(base), {}};
  const auto n = large ? rng.uniform_int(20, 48) : rng.uniform_int(3, 10);
  const bool final_deny = rng.bernoulli(0.5);
  const auto body = n - (final_deny ? 1 : 0);
  // Rules are drawn one at a time and rejected when they would be shadowed.
  for (int attempt = 0; static_cast<std::int64_t>(t.lines.size()) < body && attempt < 50 * n; ++attempt) {
    const std::string action = rng.bernoulli(0.75) ? "permit" : "deny";
    const std::string proto = pick(rng, kProtocols);
    std::string line = fmt::format("{} {} {} {}", action, proto, acl_endpoint(rng, true, names, rf_templates),
                                   acl_endpoint(rng, false, names, rf_templates));
    if (proto != "ip" && rng.bernoulli(0.7)) line += " eq " + pick(rng, kPorts);
    if (std::find(t.lines.begin(), t.lines.end(), line) != t.lines.end()) continue;
    t.lines.push_back(line);
    if (acl_lines_shadowed(t.lines)) t.lines.pop_back();
  }
  if (final_deny) t.lines.push_back("deny ip any any");
  return t;
}

std::string filter_line(Rng& rng, const std::string& action) {
  std::string prefix;
  int len;
  if (rng.bernoulli(0.5)) {
    len = rng.bernoulli(0.5) ? 16 : 24;
    prefix = site_prefix(rng, len);
  } else {
    prefix = pick(rng, kPublicBlocks);
    len = std::stoi(prefix.substr(prefix.find('/') + 1));
  }
  std::string line = action + " " + prefix;
  const double u = rng.uniform01();
  if (u < 0.3 && len + 8 <= 32) {
    line += fmt::format(" le {}", len + 8);
  } else if (u < 0.5 && len < 32) {
    line += fmt::format(" ge {} le 32", len + 1);
  }
  return line;
}

Template make_route_filter(Rng& rng, std::string base, bool large) {
  Template t{std::move(base), {}};
  const auto n = large ? rng.uniform_int(14, 30) : rng.uniform_int(2, 8);
  const bool final_deny = rng.bernoulli(0.4);
  while (static_cast<std::int64_t>(t.lines.size()) < n - (final_deny ? 1 : 0)) {
    auto line = filter_line(rng, rng.bernoulli(0.8) ? "permit" : "deny");
    if (std::find(t.lines.begin(), t.lines.end(), line) == t.lines.end()) t.lines.push_back(line);
  }
  if (final_deny) t.lines.push_back("deny 0.0.0.0/0 le 32");
  return t;
}

std::string route_target(Rng& rng) { return fmt::format("65000:{}", rng.uniform_int(100, 999)); }

Template make_vrf(Rng& rng, std::string base, const Names& names, std::size_t rp_templates) {
  Template t{std::move(base), {"rd 65000:{S}"}};
  std::set<std::string> imports, exports;
  const auto ni = rng.uniform_int(1, 3), ne = rng.uniform_int(1, 2);
  while (static_cast<std::int64_t>(imports.size()) < ni) imports.insert(route_target(rng));
  while (static_cast<std::int64_t>(exports.size()) < ne) exports.insert(route_target(rng));
  for (const auto& rt : imports) t.lines.push_back("route-target import " + rt);
  for (const auto& rt : exports) t.lines.push_back("route-target export " + rt);
  if (rp_templates > 0) {
    auto policy = [&] {
      return names.first_instance(PropertyKind::RoutingPolicy,
                                  static_cast<std::size_t>(rng.uniform_int(0, rp_templates - 1)));
    };
    if (rng.bernoulli(0.7)) t.lines.push_back("import-policy " + policy());
    if (rng.bernoulli(0.5)) t.lines.push_back("export-policy " + policy());
  }
  return t;
}

Template make_policy(Rng& rng, std::string base, const Names& names, std::size_t acl_templates,
                     std::size_t rf_templates) {
  Template t{std::move(base), {}};
  bool matched = false;
  if (acl_templates > 0 && rng.bernoulli(0.6)) {
    t.lines.push_back("match acl " + names.first_instance(PropertyKind::Acl, static_cast<std::size_t>(rng.uniform_int(
                                                                                 0, acl_templates - 1))));
    matched = true;
  }
  if (rf_templates > 0 && (!matched || rng.bernoulli(0.6))) {
    t.lines.push_back("match route-filter " +
                      names.first_instance(PropertyKind::RouteFilter,
                                           static_cast<std::size_t>(rng.uniform_int(0, rf_templates - 1))));
  }
  if (rng.bernoulli(0.7)) {
    t.lines.push_back(fmt::format("set local-preference {}", pick(rng, std::vector<int>{100, 120, 150, 200, 250})));
  }
  const auto communities = rng.uniform_int(0, 2);
  std::set<std::string> cs;
  while (static_cast<std::int64_t>(cs.size()) < communities) cs.insert(route_target(rng));
  for (const auto& c : cs) t.lines.push_back("set community " + c);
  t.lines.push_back(rng.bernoulli(0.8) ? "action permit" : "action deny");
  return t;
}

struct GenProperty {
  std::size_t device = 0;
  PropertyKind kind = PropertyKind::Acl;
  std::size_t template_index = 0;
  std::string name;
  std::vector<std::string> lines;  // rendered entries
  bool touched = false;
};

std::string device_name(std::size_t d, std::size_t node_count) {
  const auto width = std::max<std::size_t>(3, std::to_string(node_count).size());
  return fmt::format("r{:0{}}", d + 1, width);
}

// Site octet: distinct per device up to 250 devices, then wraps.
std::size_t site_of(std::size_t d) { return d % 250 + 1; }

std::string replace_token(const std::string& line, std::size_t index, const std::string& value) {
  auto tokens = split_ws(line);
  tokens.at(index) = value;
  return join(tokens, " ");
}

bool is_ref_line(const std::string& l) {
  return l.rfind("match acl ", 0) == 0 || l.rfind("match route-filter ", 0) == 0 ||
         l.rfind("import-policy ", 0) == 0 || l.rfind("export-policy ", 0) == 0;
}

// Each mutator returns false when the property offers no applicable site.

bool inject_dangling(GenProperty& p, Rng& rng, std::string& missing) {
  std::vector<std::size_t> sites;
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    if (is_ref_line(p.lines[i])) sites.push_back(i);
  }
  if (sites.empty()) return false;
  auto& line = p.lines[pick(rng, sites)];
  auto tokens = split_ws(line);
  auto& name = tokens.back();
  name = name.substr(0, name.rfind('_')) + "_OLD";
  missing = name;
  line = join(tokens, " ");
  return true;
}

bool flip_action(std::string& line) {
  if (line.rfind("permit ", 0) == 0) {
    line = "deny " + line.substr(7);
  } else if (line.rfind("deny ", 0) == 0) {
    line = "permit " + line.substr(5);
  } else {
    return false;
  }
  return true;
}

bool inject_deviant(GenProperty& p, Rng& rng) {
  switch (p.kind) {
    case PropertyKind::Acl: {
      if (p.lines.size() < 2) return false;
      p.lines.erase(p.lines.begin() + rng.uniform_int(0, static_cast<std::int64_t>(p.lines.size()) - 2));
      return true;
    }
    case PropertyKind::RouteFilter: {
      auto& line = p.lines[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(p.lines.size()) - 1))];
      auto rule = parse_filter_rule(to_entry(line));
      if (!rule) return false;
      const int len = rule->prefix.length < 32 ? rule->prefix.length + 1 : rule->prefix.length - 1;
      std::string out = fmt::format("{} {}/{}", line.substr(0, line.find(' ')),
                                    rule->prefix.str().substr(0, rule->prefix.str().find('/')), len);
      const int ge = rule->ge ? std::max(*rule->ge, len) : 0;
      if (rule->ge) out += fmt::format(" ge {}", ge);
      if (rule->le) out += fmt::format(" le {}", std::max({*rule->le, len, ge}));
      line = out;
      return true;
    }
    case PropertyKind::Vrf: {
      auto pos = std::find_if(p.lines.begin(), p.lines.end(),
                              [](const std::string& l) { return l.rfind("route-target export ", 0) == 0; });
      p.lines.insert(pos, "route-target export 65000:" + std::to_string(rng.uniform_int(1000, 1999)));
      return true;
    }
    case PropertyKind::RoutingPolicy: {
      std::string value;
      do {
        value = std::to_string(rng.uniform_int(1, 99) * 10);
      } while (std::find(p.lines.begin(), p.lines.end(), "set local-preference " + value) != p.lines.end());
      for (auto& l : p.lines) {
        if (l.rfind("set local-preference ", 0) == 0) {
          l = "set local-preference " + value;
          return true;
        }
      }
      p.lines.insert(p.lines.end() - 1, "set local-preference " + value);
      return true;
    }
  }
  return false;
}

bool inject_inconsistent(GenProperty& p, Rng& rng) {
  switch (p.kind) {
    case PropertyKind::Acl:
    case PropertyKind::RouteFilter: {
      const auto last = p.lines.size() - (p.lines.size() > 1 ? 2 : 1);
      return flip_action(p.lines[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(last)))]);
    }
    case PropertyKind::Vrf:
      for (auto& l : p.lines) {
        if (l.rfind("route-target import ", 0) == 0) {
          l = replace_token(l, 2, "65000:" + std::to_string(rng.uniform_int(2000, 2999)));
          return true;
        }
      }
      return false;
    case PropertyKind::RoutingPolicy: {
      auto& last = p.lines.back();
      last = last == "action permit" ? "action deny" : "action permit";
      return true;
    }
  }
  return false;
}

// Inserts, right after a rule with a prefix or wildcard source, a narrower rule
// with the opposite action that the earlier rule fully covers.
bool inject_shadow(GenProperty& p, Rng& rng, std::size_t site) {
  if (p.kind != PropertyKind::Acl) return false;
  std::vector<std::size_t> sites;
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    auto rule = parse_acl_rule(to_entry(p.lines[i]));
    if (!rule || rule->port) continue;
    const auto& src = rule->source;
    if (src.type == Endpoint::Type::Any || (src.type == Endpoint::Type::Prefix && src.prefix.length <= 24)) {
      sites.push_back(i);
    }
  }
  if (sites.empty()) return false;
  const auto i = pick(rng, sites);
  auto rule = *parse_acl_rule(to_entry(p.lines[i]));
  std::string src;
  if (rule.source.type == Endpoint::Type::Any) {
    src = fmt::format("10.{}.250.0/28", site);
  } else {
    const std::uint32_t span = rule.source.prefix.length == 16 ? 0xffffu : 0xffu;
    const std::uint32_t offset = static_cast<std::uint32_t>(rng.uniform_int(0, span / 16)) * 16 & span;
    src = Prefix{rule.source.prefix.address | offset, 28}.str();
  }
  auto tokens = split_ws(p.lines[i]);
  // tokens: action proto src... dst... [eq port]; the source spans 1 or 2 tokens.
  const std::size_t src_width = tokens[2] == "host" || tokens[2] == "filter" ? 2 : 1;
  std::vector<std::string> shadow{rule.action == Action::Permit ? "deny" : "permit",
                                  rule.protocol == "ip" ? "tcp" : rule.protocol, src};
  if (rule.protocol == "ip") {
    shadow.insert(shadow.end(), tokens.begin() + 2 + static_cast<std::ptrdiff_t>(src_width), tokens.end());
    shadow.insert(shadow.end(), {"eq", "23"});
  } else {
    shadow.insert(shadow.end(), tokens.begin() + 2 + static_cast<std::ptrdiff_t>(src_width), tokens.end());
  }
  p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(i) + 1, join(shadow, " "));
  return true;
}

bool inject_benign(GenProperty& p, Rng& rng, std::size_t site) {
  const bool alternate = rng.bernoulli(0.5);
  switch (p.kind) {
    case PropertyKind::Acl: {
      if (!alternate) {
        for (auto n = rng.uniform_int(1, 3); n > 0; --n) {
          p.lines.insert(p.lines.begin(), fmt::format("permit {} host 192.168.{}.{} any eq {}",
                                                      rng.bernoulli(0.5) ? "tcp" : "udp", rng.uniform_int(0, 255),
                                                      rng.uniform_int(1, 254), pick(rng, kPorts)));
        }
        return true;
      }
      auto pos = p.lines.end();
      if (p.lines.back() == "deny ip any any") --pos;
      std::vector<std::string> extra;
      for (auto n = rng.uniform_int(1, 4); n > 0; --n) {
        extra.push_back(fmt::format("permit udp 10.{}.{}.0/24 10.{}.{}.0/24 eq {}", site, rng.uniform_int(200, 249),
                                    site, rng.uniform_int(200, 249), pick(rng, kPorts)));
      }
      p.lines.insert(pos, extra.begin(), extra.end());
      return true;
    }
    case PropertyKind::RouteFilter: {
      auto pos = alternate ? p.lines.begin() : p.lines.end();
      if (!alternate && p.lines.back() == "deny 0.0.0.0/0 le 32") --pos;
      std::vector<std::string> extra;
      for (auto n = rng.uniform_int(1, 3); n > 0; --n) {
        const auto len = rng.uniform_int(20, 28);
        std::string line = Prefix{(198u << 24) | (18u << 16) | (static_cast<std::uint32_t>(rng.uniform_int(0, 15)) << 12),
                                  static_cast<int>(len)}.str();
        if (rng.bernoulli(0.5)) line += fmt::format(" le {}", rng.uniform_int(len + 1, 32));
        extra.push_back((alternate ? "deny " : "permit ") + line);
      }
      p.lines.insert(pos, extra.begin(), extra.end());
      return true;
    }
    case PropertyKind::Vrf: {
      const std::string dir = alternate ? "export" : "import";
      auto pos = std::find_if(p.lines.begin(), p.lines.end(),
                              [&](const std::string& l) { return l.rfind("route-target " + dir + " ", 0) == 0; });
      for (auto n = rng.uniform_int(1, 2); n > 0; --n) {
        pos = p.lines.insert(pos, fmt::format("route-target {} 65000:{}", dir, rng.uniform_int(3000, 3999)));
      }
      return true;
    }
    case PropertyKind::RoutingPolicy:
      if (alternate) {
        p.lines.insert(p.lines.end() - 1, fmt::format("set med {}", rng.uniform_int(1, 500)));
      } else {
        p.lines.insert(p.lines.end() - 1, "set community 65001:" + std::to_string(rng.uniform_int(100, 999)));
      }
      return true;
  }
  return false;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

std::size_t planned_count(double rate, std::size_t total) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(total)));
}

}  // namespace

void CorpusSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InfeasibleSpec, msg); };
  if (node_count < 1) fail("node_count must be >= 1");
  for (auto k : kAllPropertyKinds) {
    const auto per = properties_per_node.count(k) ? properties_per_node.at(k) : 0;
    const auto templates = template_count.count(k) ? template_count.at(k) : 0;
    if (templates > per) {
      fail(fmt::format("template_count[{}] = {} exceeds properties_per_node = {}", to_string(k), templates, per));
    }
    if (per > 0 && templates == 0) fail(fmt::format("{} properties requested with no templates", to_string(k)));
  }
  double total_rate = benign_variation_rate;
  for (const auto& [t, r] : bug_injection) {
    if (!(r >= 0 && r <= 1)) fail(fmt::format("rate for {} outside [0,1]", to_string(t)));
    if (t == ProblemType::Unknown && r > 0) fail("cannot inject bugs of type Unknown");
    total_rate += r;
  }
  if (!(benign_variation_rate >= 0 && benign_variation_rate <= 1)) fail("benign_variation_rate outside [0,1]");
  if (total_rate > 1) fail("injection rates sum above 1");
}

std::size_t CorpusSpec::total_properties() const {
  std::size_t per = 0;
  for (const auto& [k, n] : properties_per_node) per += n;
  return per * node_count;
}

std::size_t GroundTruth::buggy_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const auto& kv) { return kv.second.buggy; }));
}

GeneratedCorpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  auto count_of = [](const std::map<PropertyKind, std::size_t>& m, PropertyKind k) {
    auto it = m.find(k);
    return it == m.end() ? std::size_t{0} : it->second;
  };

  Names names;
  for (auto k : kAllPropertyKinds) {
    for (std::size_t t = 0; t < count_of(spec.template_count, k); ++t) names.bases[k].push_back(base_name(k, t));
  }
  const auto n_acl = count_of(spec.template_count, PropertyKind::Acl);
  const auto n_rf = count_of(spec.template_count, PropertyKind::RouteFilter);
  const auto n_rp = count_of(spec.template_count, PropertyKind::RoutingPolicy);

  // About a quarter of ACL and route-filter templates are long special-purpose lists.
  auto large_flags = [&](std::size_t n) {
    std::vector<bool> large(n);
    for (std::size_t t = 0; t < n; ++t) large[t] = rng.bernoulli(0.25);
    if (n >= 3 && std::none_of(large.begin(), large.end(), [](bool b) { return b; })) large[n - 1] = true;
    return large;
  };
  std::map<PropertyKind, std::vector<Template>> templates;
  {
    const auto large = large_flags(n_acl);
    for (std::size_t t = 0; t < n_acl; ++t) {
      templates[PropertyKind::Acl].push_back(make_acl(rng, names.bases[PropertyKind::Acl][t], names, n_rf, large[t]));
    }
  }
  {
    const auto large = large_flags(n_rf);
    for (std::size_t t = 0; t < n_rf; ++t) {
      templates[PropertyKind::RouteFilter].push_back(
          make_route_filter(rng, names.bases[PropertyKind::RouteFilter][t], large[t]));
    }
  }
  for (const auto& b : names.bases[PropertyKind::Vrf]) templates[PropertyKind::Vrf].push_back(make_vrf(rng, b, names, n_rp));
  for (const auto& b : names.bases[PropertyKind::RoutingPolicy]) {
    templates[PropertyKind::RoutingPolicy].push_back(make_policy(rng, b, names, n_acl, n_rf));
  }

  // Templates referenced by other templates, and the first of each kind, are on
  // every device; the rest are carried by a random share of devices. A device's
  // remaining slots follow a 1/(t+1) prevalence over the templates it carries.
  std::map<PropertyKind, std::vector<double>> coverage;
  for (auto k : kAllPropertyKinds) {
    auto& cov = coverage[k];
    for (std::size_t t = 0; t < templates[k].size(); ++t) {
      cov.push_back(t == 0 ? 1.0 : pick(rng, std::vector<double>{1.0, 0.5, 0.25, 0.1, 0.05}));
    }
  }
  for (const auto& [k, ts] : templates) {
    for (const auto& t : ts) {
      for (const auto& line : t.lines) {
        const auto target = split_ws(line).back();
        for (auto rk : kAllPropertyKinds) {
          const auto& bases = names.bases[rk];
          for (std::size_t i = 0; i < bases.size(); ++i) {
            if (target == bases[i] + "_1") coverage[rk][i] = 1.0;
          }
        }
      }
    }
  }

  std::vector<GenProperty> props;
  const PropertyKind order[] = {PropertyKind::RouteFilter, PropertyKind::Acl, PropertyKind::RoutingPolicy,
                                PropertyKind::Vrf};
  for (std::size_t d = 0; d < spec.node_count; ++d) {
    for (auto k : order) {
      const auto& ts = templates[k];
      std::vector<std::size_t> carried;
      for (std::size_t t = 0; t < ts.size(); ++t) {
        if (coverage[k][t] >= 1.0 || rng.bernoulli(coverage[k][t])) carried.push_back(t);
      }
      std::vector<std::size_t> ordinal(ts.size(), 0);
      double total_weight = 0;
      for (auto t : carried) total_weight += 1.0 / static_cast<double>(t + 1);
      for (std::size_t j = 0; j < count_of(spec.properties_per_node, k); ++j) {
        std::size_t t;
        if (j < carried.size()) {
          t = carried[j];
        } else {
          double u = rng.uniform01() * total_weight;
          std::size_t c = 0;
          for (; c + 1 < carried.size(); ++c) {
            u -= 1.0 / static_cast<double>(carried[c] + 1);
            if (u < 0) break;
          }
          t = carried[c];
        }
        GenProperty p;
        p.device = d;
        p.kind = k;
        p.template_index = t;
        p.name = fmt::format("{}_{}", ts[t].base, ++ordinal[t]);
        for (const auto& l : ts[t].lines) p.lines.push_back(substitute_site(l, site_of(d)));
        props.push_back(std::move(p));
      }
    }
  }

  GeneratedCorpus out;
  GroundTruth& truth = out.truth;
  std::vector<std::string> ids(props.size());
  for (std::size_t i = 0; i < props.size(); ++i) {
    const auto& p = props[i];
    ids[i] = property_id(device_name(p.device, spec.node_count), stanza_kind_of(p.kind), p.name);
    truth.labels[ids[i]] = TruthLabel{false, ProblemType::Unknown,
                                      std::string(to_string(p.kind)) + ":" + templates[p.kind][p.template_index].base,
                                      false};
    ++out.property_counts[p.kind];
  }

  std::vector<std::size_t> order_idx(props.size());
  for (std::size_t i = 0; i < props.size(); ++i) order_idx[i] = i;
  const auto total = props.size();

  for (auto type : {ProblemType::UndefinedReference, ProblemType::DeviantAttributeValue,
                    ProblemType::InconsistentAcrossDevices, ProblemType::ShadowedRule}) {
    auto rate_it = spec.bug_injection.find(type);
    const auto want = planned_count(rate_it == spec.bug_injection.end() ? 0.0 : rate_it->second, total);
    shuffle(order_idx, rng);
    std::size_t done = 0;
    for (auto i : order_idx) {
      if (done == want) break;
      auto& p = props[i];
      if (p.touched) continue;
      GenProperty trial = p;
      bool ok = false;
      std::string missing;
      switch (type) {
        case ProblemType::UndefinedReference: ok = inject_dangling(trial, rng, missing); break;
        case ProblemType::DeviantAttributeValue: ok = inject_deviant(trial, rng); break;
        case ProblemType::InconsistentAcrossDevices: ok = inject_inconsistent(trial, rng); break;
        case ProblemType::ShadowedRule: ok = inject_shadow(trial, rng, site_of(p.device)); break;
        default: break;
      }
      if (!ok || trial.lines == p.lines) continue;
      trial.touched = true;
      p = std::move(trial);
      auto& label = truth.labels[ids[i]];
      label.buggy = true;
      label.problem_type = type;
      if (type == ProblemType::UndefinedReference) truth.injected_dangling.push_back({ids[i], missing});
      ++done;
    }
    truth.injected_count[type] = done;
  }
  std::sort(truth.injected_dangling.begin(), truth.injected_dangling.end(),
            [](const auto& a, const auto& b) { return std::tie(a.property_id, a.missing_name) < std::tie(b.property_id, b.missing_name); });

  {
    const auto want = planned_count(spec.benign_variation_rate, total);
    shuffle(order_idx, rng);
    std::size_t done = 0;
    for (auto i : order_idx) {
      if (done == want) break;
      auto& p = props[i];
      if (p.touched) continue;
      GenProperty trial = p;
      if (!inject_benign(trial, rng, site_of(p.device))) continue;
      // A variation that shadows an existing rule would be a real defect.
      if (p.kind == PropertyKind::Acl && acl_lines_shadowed(trial.lines)) continue;
      p = std::move(trial);
      p.touched = true;
      truth.labels[ids[i]].benign_variation = true;
      ++done;
    }
  }

  // Render devices, adding interfaces and BGP neighbors that reference local objects.
  std::vector<std::vector<std::size_t>> by_device(spec.node_count);
  for (std::size_t i = 0; i < props.size(); ++i) by_device[props[i].device].push_back(i);
  std::vector<DeviceConfig> devices;
  for (std::size_t d = 0; d < spec.node_count; ++d) {
    const auto name = device_name(d, spec.node_count);
    std::map<PropertyKind, std::vector<std::string>> local;
    std::string text = fmt::format("hostname {}\n", name);
    for (auto i : by_device[d]) {
      const auto& p = props[i];
      local[p.kind].push_back(p.name);
      text += fmt::format("{} {}\n", to_string(stanza_kind_of(p.kind)), p.name);
      for (const auto& l : p.lines) text += " " + l + "\n";
    }
    const auto site = site_of(d);
    for (std::size_t i = 0; i < spec.interfaces_per_node; ++i) {
      text += fmt::format("interface ge-0/0/{}\n address 10.{}.{}.1/24\n", i, site, 200 + i % 50);
      if (!local[PropertyKind::Acl].empty()) text += " acl-in " + pick(rng, local[PropertyKind::Acl]) + "\n";
      if (!local[PropertyKind::Vrf].empty() && rng.bernoulli(0.5)) {
        text += " vrf " + pick(rng, local[PropertyKind::Vrf]) + "\n";
      }
    }
    for (std::size_t i = 0; i < spec.bgp_neighbors_per_node; ++i) {
      text += fmt::format("bgp-neighbor 10.255.{}.{}\n remote-as {}\n", site, i + 1, 65001 + i);
      if (!local[PropertyKind::RoutingPolicy].empty()) {
        text += " import-policy " + pick(rng, local[PropertyKind::RoutingPolicy]) + "\n";
        text += " export-policy " + pick(rng, local[PropertyKind::RoutingPolicy]) + "\n";
      }
    }
    devices.push_back(parse_config(text, name, name + ".cfg"));
    out.device_texts.emplace(name, std::move(text));
  }
  out.snapshot = make_snapshot(std::move(devices));
  for (const auto& [k, ts] : templates) {
    for (const auto& t : ts) out.templates[k].push_back(t.base);
  }
  return out;
}

}  // namespace netsig
