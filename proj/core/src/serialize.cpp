#include "netsig/serialize.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "netsig/error.hpp"
#include "netsig/util.hpp"

namespace netsig {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(std::string_view what) { throw Error(ErrorCode::ParseError, std::string(what)); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(fmt::format("missing field '{}'", key));
  return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(fmt::format("field '{}' has the wrong type", key));
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key);
}

std::optional<std::string> opt_string(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<std::string>(j, key);
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

PropertyKind kind_from(const Json& j, const char* key) {
  auto k = property_kind_from_string(get<std::string>(j, key));
  if (!k) bad(fmt::format("unknown property kind in '{}'", key));
  return *k;
}

ProblemType problem_from(const std::string& s) {
  auto t = problem_type_from_string(s);
  if (!t) bad("unknown problem type '" + s + "'");
  return *t;
}

Json endpoint_json(const Endpoint& e) {
  switch (e.type) {
    case Endpoint::Type::Any: return "any";
    case Endpoint::Type::Prefix: return e.prefix.str();
    case Endpoint::Type::Filter: return "filter " + e.filter;
  }
  return nullptr;
}

Json attr_json(const AttrValue& v) {
  return std::visit(overloaded{
                        [](double d) { return Json(d); },
                        [](const std::string& s) { return Json(s); },
                        [](const TokenSet& s) { return Json(s); },
                        [](const Prefix& p) { return Json(p.str()); },
                        [](const PrefixList& ps) {
                          Json a = Json::array();
                          for (const auto& p : ps) a.push_back(p.str());
                          return a;
                        },
                        [](const AclRuleList& rules) {
                          Json a = Json::array();
                          for (const auto& r : rules) {
                            a.push_back(Json{{"action", std::string(to_string(r.action))},
                                             {"protocol", r.protocol},
                                             {"source", endpoint_json(r.source)},
                                             {"destination", endpoint_json(r.destination)},
                                             {"port", opt(r.port)}});
                          }
                          return a;
                        },
                        [](const FilterRuleList& rules) {
                          Json a = Json::array();
                          for (const auto& r : rules) {
                            a.push_back(Json{{"action", std::string(to_string(r.action))},
                                             {"prefix", r.prefix.str()},
                                             {"ge", opt(r.ge)},
                                             {"le", opt(r.le)}});
                          }
                          return a;
                        },
                    },
                    v);
}

Level level_from(const std::string& s) {
  if (s == "INFO") return Level::Info;
  if (s == "WARNING") return Level::Warning;
  if (s == "ERROR") return Level::Error;
  bad("unknown diagnostic level '" + s + "'");
}

Diagnostic diagnostic_from_json(const Json& j) {
  Diagnostic d;
  d.level = level_from(get<std::string>(j, "level"));
  d.code = get<std::string>(j, "code");
  d.file = get_or<std::string>(j, "file", "");
  d.line = get_or<int>(j, "line", 0);
  d.message = get_or<std::string>(j, "message", "");
  d.subjects = get_or<std::vector<std::string>>(j, "subjects", {});
  return d;
}

}  // namespace

Json to_json(const Diagnostic& d) {
  return Json{{"level", std::string(to_string(d.level))},
              {"code", d.code},
              {"file", d.file},
              {"line", d.line},
              {"message", d.message},
              {"subjects", d.subjects}};
}

Json to_json(const MiningParams& p) {
  Json weights = Json::object();
  for (const auto& [k, w] : p.weights) weights[k] = w;
  return Json{{"min_cluster_size", p.min_cluster_size},
              {"merge_distance", p.merge_distance},
              {"common_fraction", p.common_fraction},
              {"mad_epsilon", p.mad_epsilon},
              {"categorical_deviation", p.categorical_deviation},
              {"default_threshold", p.default_threshold},
              {"weights", weights},
              {"seed", p.seed}};
}

MiningParams mining_params_from_json(const Json& j) {
  MiningParams p;
  p.min_cluster_size = get_or<std::size_t>(j, "min_cluster_size", p.min_cluster_size);
  p.merge_distance = get_or<double>(j, "merge_distance", p.merge_distance);
  p.common_fraction = get_or<double>(j, "common_fraction", p.common_fraction);
  p.mad_epsilon = get_or<double>(j, "mad_epsilon", p.mad_epsilon);
  p.categorical_deviation = get_or<double>(j, "categorical_deviation", p.categorical_deviation);
  p.default_threshold = get_or<double>(j, "default_threshold", p.default_threshold);
  p.weights = get_or<std::map<std::string, double>>(j, "weights", {});
  p.seed = get_or<std::uint64_t>(j, "seed", 0);
  return p;
}

Json to_json(const DetectorConfig& c) {
  return Json{{"method", std::string(to_string(c.method))},
              {"zscore_threshold", c.zscore_threshold},
              {"modz_threshold", c.modz_threshold},
              {"gmm_components", c.gmm_components},
              {"gmm_max_iters", c.gmm_max_iters},
              {"gmm_tol", c.gmm_tol},
              {"gmm_outlier_percentile", c.gmm_outlier_percentile},
              {"seed", c.seed}};
}

DetectorConfig detector_config_from_json(const Json& j) {
  DetectorConfig c;
  auto m = method_from_string(get_or<std::string>(j, "method", "signature"));
  if (!m) bad("unknown detector method");
  c.method = *m;
  c.zscore_threshold = get_or<double>(j, "zscore_threshold", c.zscore_threshold);
  c.modz_threshold = get_or<double>(j, "modz_threshold", c.modz_threshold);
  c.gmm_components = get_or<int>(j, "gmm_components", c.gmm_components);
  c.gmm_max_iters = get_or<int>(j, "gmm_max_iters", c.gmm_max_iters);
  c.gmm_tol = get_or<double>(j, "gmm_tol", c.gmm_tol);
  c.gmm_outlier_percentile = get_or<double>(j, "gmm_outlier_percentile", c.gmm_outlier_percentile);
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  return c;
}

Json to_json(const SeverityWeights& w) {
  Json weights = Json::object();
  for (auto t : kAllProblemTypes) weights[std::string(to_string(t))] = w.weight(t);
  return Json{{"alpha", w.alpha}, {"beta", w.beta}, {"problem_type_weight", weights}};
}

Json to_json(const Finding& f) {
  Json deviant = Json::array();
  for (const auto& d : f.deviant_features) {
    deviant.push_back(Json{{"feature", d.feature},
                           {"numeric", d.numeric},
                           {"observed", d.observed},
                           {"expected", d.expected},
                           {"deviation", d.deviation}});
  }
  return Json{{"property_id", f.property_id},
              {"kind", std::string(to_string(f.kind))},
              {"detector", std::string(to_string(f.detector))},
              {"outlier_score", f.outlier_score},
              {"threshold", f.threshold},
              {"violated_signature", opt(f.violated_signature)},
              {"deviant_features", deviant},
              {"problem_type", std::string(to_string(f.problem_type))},
              {"blast_radius", opt(f.blast_radius)},
              {"severity", opt(f.severity)},
              {"rank", opt(f.rank)}};
}

Finding finding_from_json(const Json& j) {
  Finding f;
  f.property_id = get<std::string>(j, "property_id");
  f.kind = kind_from(j, "kind");
  auto m = method_from_string(get<std::string>(j, "detector"));
  if (!m) bad("unknown detector");
  f.detector = *m;
  f.outlier_score = get<double>(j, "outlier_score");
  f.threshold = get<double>(j, "threshold");
  f.violated_signature = opt_string(j, "violated_signature");
  for (const auto& d : field(j, "deviant_features")) {
    f.deviant_features.push_back({get<std::string>(d, "feature"), get<bool>(d, "numeric"),
                                  get<std::string>(d, "observed"), get<std::string>(d, "expected"),
                                  get<double>(d, "deviation")});
  }
  f.problem_type = problem_from(get<std::string>(j, "problem_type"));
  if (j.contains("blast_radius") && !j["blast_radius"].is_null()) f.blast_radius = get<std::size_t>(j, "blast_radius");
  if (j.contains("severity") && !j["severity"].is_null()) f.severity = get<double>(j, "severity");
  if (j.contains("rank") && !j["rank"].is_null()) f.rank = get<std::size_t>(j, "rank");
  return f;
}

Json to_json(const SignatureSet& set) {
  Json sigs = Json::array();
  for (const auto& s : set.signatures) {
    const auto& schema = feature_schema(s.kind);
    Json numeric = Json::array(), categorical = Json::array();
    std::size_t ni = 0, ci = 0;
    for (const auto& spec : schema.features) {
      if (is_numeric(spec.type)) {
        const auto& st = s.numeric_stats.at(ni++);
        numeric.push_back(Json{{"feature", spec.name},
                               {"median", st.median},
                               {"mad", st.mad},
                               {"mean", st.mean},
                               {"stddev", st.stddev}});
      } else {
        Json counts = Json::object();
        for (const auto& [value, n] : s.categorical_stats.at(ci++)) counts[value] = n;
        categorical.push_back(Json{{"feature", spec.name}, {"counts", counts}});
      }
    }
    Json whitelist = Json::object();
    for (const auto& [feature, values] : s.whitelist) whitelist[feature] = values;
    sigs.push_back(Json{{"id", s.id},
                        {"kind", std::string(to_string(s.kind))},
                        {"name_template", s.name_template},
                        {"member_count", s.member_count},
                        {"threshold", s.threshold},
                        {"numeric_stats", numeric},
                        {"categorical_stats", categorical},
                        {"whitelist", whitelist},
                        {"suppressed", s.suppressed},
                        {"members", s.members}});
  }
  Json kinds = Json::array();
  for (auto k : set.mined_kinds) kinds.push_back(std::string(to_string(k)));
  Json diags = Json::array();
  for (const auto& d : set.diagnostics) diags.push_back(to_json(d));
  Json assignment = Json::object();
  for (const auto& [pid, sid] : set.assignment) assignment[pid] = sid;
  return Json{{"format", "netsig-signatures"},
              {"format_version", kSignaturesFormatVersion},
              {"schema_version", set.schema_version},
              {"generation", set.generation},
              {"params", to_json(set.params)},
              {"mined_kinds", kinds},
              {"signatures", sigs},
              {"assignment", assignment},
              {"diagnostics", diags}};
}

SignatureSet signature_set_from_json(const Json& j) {
  if (get<std::string>(j, "format") != "netsig-signatures") bad("not a signatures document");
  if (get<int>(j, "format_version") != kSignaturesFormatVersion) bad("unsupported signatures format_version");
  SignatureSet set;
  set.schema_version = get<int>(j, "schema_version");
  if (set.schema_version != kSchemaVersion) {
    throw Error(ErrorCode::SchemaMismatch, fmt::format("signatures use feature schema version {}, this build uses {}",
                                                       set.schema_version, kSchemaVersion));
  }
  set.generation = get<std::uint64_t>(j, "generation");
  set.params = mining_params_from_json(field(j, "params"));
  for (const auto& k : field(j, "mined_kinds")) {
    auto kind = property_kind_from_string(k.get<std::string>());
    if (!kind) bad("unknown mined kind");
    set.mined_kinds.insert(*kind);
  }
  for (const auto& js : field(j, "signatures")) {
    Signature s;
    s.id = get<std::string>(js, "id");
    s.kind = kind_from(js, "kind");
    s.name_template = get<std::string>(js, "name_template");
    s.member_count = get<std::size_t>(js, "member_count");
    s.threshold = get<double>(js, "threshold");
    const auto& schema = feature_schema(s.kind);
    const auto& numeric = field(js, "numeric_stats");
    const auto& categorical = field(js, "categorical_stats");
    if (numeric.size() != schema.numeric_count() || categorical.size() != schema.categorical_count()) {
      throw Error(ErrorCode::SchemaMismatch, s.id + ": stats do not match the feature schema");
    }
    std::size_t ni = 0, ci = 0;
    for (const auto& spec : schema.features) {
      const Json& entry = is_numeric(spec.type) ? numeric.at(ni++) : categorical.at(ci++);
      if (get<std::string>(entry, "feature") != spec.name) {
        throw Error(ErrorCode::SchemaMismatch, fmt::format("{}: expected feature '{}'", s.id, spec.name));
      }
      if (is_numeric(spec.type)) {
        s.numeric_stats.push_back({get<double>(entry, "median"), get<double>(entry, "mad"), get<double>(entry, "mean"),
                                   get<double>(entry, "stddev")});
      } else {
        s.categorical_stats.push_back(get<std::map<std::string, std::size_t>>(entry, "counts"));
      }
    }
    s.whitelist = get<std::map<std::string, std::set<std::string>>>(js, "whitelist");
    s.suppressed = get<std::set<std::string>>(js, "suppressed");
    s.members = get<std::vector<std::string>>(js, "members");
    set.signatures.push_back(std::move(s));
  }
  set.assignment = get<std::map<std::string, std::string>>(j, "assignment");
  for (const auto& d : get_or<Json>(j, "diagnostics", Json::array())) set.diagnostics.push_back(diagnostic_from_json(d));
  return set;
}

Json to_json(const SignatureReportRow& row) {
  return Json{{"signature_id", row.signature_id},
              {"kind", std::string(to_string(row.kind))},
              {"name_template", row.name_template},
              {"member_count", row.member_count},
              {"top_deviant_features", row.top_deviant_features},
              {"threshold", row.threshold},
              {"whitelist_size", row.whitelist_size},
              {"suppressed_count", row.suppressed_count}};
}

Json to_json(const RetuneAction& a) {
  Json j = std::visit(overloaded{
                          [](const MergeSignatures& m) { return Json{{"type", "merge"}, {"a", m.a}, {"b", m.b}}; },
                          [](const AdjustThreshold& t) {
                            return Json{{"type", "adjust_threshold"},
                                        {"signature_id", t.signature_id},
                                        {"threshold", t.threshold}};
                          },
                          [](const WhitelistValue& w) {
                            return Json{{"type", "whitelist"},
                                        {"signature_id", w.signature_id},
                                        {"feature", w.feature},
                                        {"value", w.value}};
                          },
                          [](const SuppressFinding& s) {
                            return Json{{"type", "suppress"},
                                        {"property_id", s.property_id},
                                        {"signature_id", s.signature_id}};
                          },
                      },
                      a.op);
  j["generation"] = a.generation;
  j["author"] = a.author;
  j["timestamp"] = a.timestamp;
  j["note"] = opt(a.note);
  return j;
}

RetuneAction retune_action_from_json(const Json& j) {
  RetuneAction a;
  const auto type = get<std::string>(j, "type");
  if (type == "merge") {
    a.op = MergeSignatures{get<std::string>(j, "a"), get<std::string>(j, "b")};
  } else if (type == "adjust_threshold") {
    a.op = AdjustThreshold{get<std::string>(j, "signature_id"), get<double>(j, "threshold")};
  } else if (type == "whitelist") {
    a.op = WhitelistValue{get<std::string>(j, "signature_id"), get<std::string>(j, "feature"),
                          get<std::string>(j, "value")};
  } else if (type == "suppress") {
    a.op = SuppressFinding{get<std::string>(j, "property_id"), get<std::string>(j, "signature_id")};
  } else {
    bad("unknown retune action type '" + type + "'");
  }
  a.generation = get<std::uint64_t>(j, "generation");
  a.author = get_or<std::string>(j, "author", "");
  a.timestamp = get_or<std::string>(j, "timestamp", "");
  a.note = opt_string(j, "note");
  return a;
}

Json to_json(const CorpusSpec& s) {
  Json per = Json::object(), templates = Json::object(), bugs = Json::object();
  for (auto k : kAllPropertyKinds) {
    const std::string name(to_string(k));
    per[name] = s.properties_per_node.count(k) ? s.properties_per_node.at(k) : 0;
    templates[name] = s.template_count.count(k) ? s.template_count.at(k) : 0;
  }
  for (auto t : kAllProblemTypes) {
    if (t == ProblemType::Unknown) continue;
    bugs[std::string(to_string(t))] = s.bug_injection.count(t) ? s.bug_injection.at(t) : 0.0;
  }
  return Json{{"node_count", s.node_count},
              {"properties_per_node", per},
              {"template_count", templates},
              {"bug_injection", bugs},
              {"benign_variation_rate", s.benign_variation_rate},
              {"interfaces_per_node", s.interfaces_per_node},
              {"bgp_neighbors_per_node", s.bgp_neighbors_per_node},
              {"seed", s.seed}};
}

CorpusSpec corpus_spec_from_json(const Json& j) {
  CorpusSpec s;
  if (!j.is_object()) bad("corpus spec must be an object");
  s.node_count = get_or<std::size_t>(j, "node_count", s.node_count);
  auto kind_map = [&](const char* key, std::map<PropertyKind, std::size_t>& out) {
    if (!j.contains(key)) return;
    out.clear();
    for (const auto& [name, v] : field(j, key).items()) {
      auto k = property_kind_from_string(name);
      if (!k) bad(fmt::format("{}: unknown property kind '{}'", key, name));
      if (!v.is_number_unsigned()) bad(fmt::format("{}.{} must be a non-negative integer", key, name));
      out[*k] = v.get<std::size_t>();
    }
  };
  kind_map("properties_per_node", s.properties_per_node);
  kind_map("template_count", s.template_count);
  if (j.contains("bug_injection")) {
    s.bug_injection.clear();
    for (const auto& [name, v] : field(j, "bug_injection").items()) {
      if (!v.is_number()) bad("bug_injection." + name + " must be a number");
      s.bug_injection[problem_from(name)] = v.get<double>();
    }
  }
  s.benign_variation_rate = get_or<double>(j, "benign_variation_rate", s.benign_variation_rate);
  s.interfaces_per_node = get_or<std::size_t>(j, "interfaces_per_node", s.interfaces_per_node);
  s.bgp_neighbors_per_node = get_or<std::size_t>(j, "bgp_neighbors_per_node", s.bgp_neighbors_per_node);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  return s;
}

Json to_json(const GroundTruth& t) {
  Json labels = Json::object();
  for (const auto& [id, l] : t.labels) {
    labels[id] = Json{{"label", l.buggy ? "buggy" : "clean"},
                      {"problem_type", l.buggy ? Json(std::string(to_string(l.problem_type))) : Json(nullptr)},
                      {"template", l.template_label},
                      {"benign_variation", l.benign_variation}};
  }
  Json counts = Json::object();
  for (const auto& [type, n] : t.injected_count) counts[std::string(to_string(type))] = n;
  Json dangling = Json::array();
  for (const auto& d : t.injected_dangling) {
    dangling.push_back(Json{{"property_id", d.property_id}, {"missing_name", d.missing_name}});
  }
  return Json{{"injected_count", counts}, {"injected_dangling", dangling}, {"labels", labels}};
}

GroundTruth ground_truth_from_json(const Json& j) {
  GroundTruth t;
  for (const auto& [id, l] : field(j, "labels").items()) {
    TruthLabel label;
    const auto kind = get<std::string>(l, "label");
    if (kind != "buggy" && kind != "clean") bad(id + ": label must be buggy or clean");
    label.buggy = kind == "buggy";
    if (label.buggy) label.problem_type = problem_from(get<std::string>(l, "problem_type"));
    label.template_label = get_or<std::string>(l, "template", "");
    label.benign_variation = get_or<bool>(l, "benign_variation", false);
    t.labels.emplace(id, std::move(label));
  }
  const auto counts = get_or<Json>(j, "injected_count", Json::object());
  for (const auto& [name, n] : counts.items()) {
    t.injected_count[problem_from(name)] = n.get<std::size_t>();
  }
  const auto dangling = get_or<Json>(j, "injected_dangling", Json::array());
  for (const auto& d : dangling) {
    t.injected_dangling.push_back({get<std::string>(d, "property_id"), get<std::string>(d, "missing_name")});
  }
  return t;
}

Json to_json(const EvalMetrics& m) {
  auto ratio = [](const Ratio& r) {
    auto v = r.value();
    return Json{{"numerator", r.num}, {"denominator", r.den}, {"value", v ? Json(*v) : Json("undefined")}};
  };
  return Json{{"tp", m.tp},
              {"fp", m.fp},
              {"fn", m.fn},
              {"precision", ratio(m.precision())},
              {"recall", ratio(m.recall())},
              {"emitted_findings", m.emitted_findings},
              {"labeled_findings", m.labeled_findings}};
}

Json to_json(const std::vector<ComparisonRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) {
    Json row{{"detector", r.name}};
    if (r.metrics) {
      row["status"] = "ok";
      row["metrics"] = to_json(*r.metrics);
    } else {
      row["status"] = "failed";
      row["error"] = r.error;
    }
    if (r.signature_count) {
      row["signature_count"] = r.signature_count;
      row["violated_signature_count"] = r.violated_signature_count;
    }
    if (r.retune_actions) row["retune_actions"] = r.retune_actions;
    a.push_back(std::move(row));
  }
  return Json{{"rows", a}};
}

Json to_json(const SankeyFlow& flow) {
  static const char* layer_names[] = {"property_kind", "deviation_category", "problem_type"};
  Json nodes = Json::array(), links = Json::array();
  for (const auto& n : flow.nodes) {
    nodes.push_back(Json{{"name", n.name}, {"layer", n.layer}, {"layer_name", layer_names[n.layer]}});
  }
  for (const auto& l : flow.links) links.push_back(Json{{"source", l.source}, {"target", l.target}, {"value", l.value}});
  return Json{{"nodes", nodes}, {"links", links}};
}

Json to_json(const Property& p) {
  Json attrs = Json::object();
  for (const auto& [k, v] : p.attributes) attrs[k] = attr_json(v);
  Json refs = Json::array();
  for (const auto& r : p.references) {
    refs.push_back(Json{{"target_kind", std::string(to_string(r.target))}, {"name", r.name}, {"line", r.line}});
  }
  return Json{{"id", p.id},
              {"kind", std::string(to_string(p.kind))},
              {"device", p.device},
              {"name", p.name},
              {"attributes", attrs},
              {"references", refs},
              {"source", Json{{"file", p.source.file}, {"start", p.source.lines.start}, {"end", p.source.lines.end}}}};
}

Json to_json(const FeatureVector& v, const TokenTable& tokens) {
  const auto& schema = feature_schema(v.kind);
  Json features = Json::object();
  std::size_t ni = 0, ci = 0;
  for (const auto& spec : schema.features) {
    if (is_numeric(spec.type)) {
      features[spec.name] = v.numeric.at(ni++);
    } else {
      features[spec.name] = tokens.token(v.categorical.at(ci++));
    }
  }
  return Json{{"property_id", v.property_id},
              {"kind", std::string(to_string(v.kind))},
              {"schema", schema.name},
              {"schema_version", v.schema_version},
              {"features", features}};
}

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", what, e.what()));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) { return parse_json(read_file(path), path.string()); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("rename {} -> {}: {}", tmp.string(), path.string(), ec.message()));
}

std::string findings_jsonl(const std::vector<Finding>& findings, const DetectorConfig& config) {
  const Json cfg = to_json(config);
  std::string out;
  for (const auto& f : findings) {
    Json j = to_json(f);
    j["config"] = cfg;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<Finding> parse_findings_jsonl(std::string_view text) {
  std::vector<Finding> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(finding_from_json(parse_json(line, "findings")));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, fmt::format("findings line {}: {}", n, e.detail()));
    }
  }
  return out;
}

std::string retune_log_jsonl(const RetuneLog& log) {
  std::string out = Json{{"retune_log", kRetuneLogFormatVersion}, {"base_generation", log.base_generation}}.dump() + "\n";
  for (const auto& a : log.actions) out += to_json(a).dump() + "\n";
  return out;
}

RetuneLog parse_retune_log(std::string_view text) {
  RetuneLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      auto j = parse_json(line, "retune log");
      if (!header) {
        if (get<int>(j, "retune_log") != kRetuneLogFormatVersion) bad("unsupported retune_log version");
        log.base_generation = get<std::uint64_t>(j, "base_generation");
        header = true;
      } else {
        log.actions.push_back(retune_action_from_json(j));
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, fmt::format("retune log line {}: {}", n, e.detail()));
    }
  }
  if (!header) bad("retune log has no header line");
  return log;
}

void write_corpus(const GeneratedCorpus& corpus, const CorpusSpec& spec, const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  const auto snap = out / "snapshot";
  fs::create_directories(snap);
  for (const auto& entry : fs::directory_iterator(snap)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") fs::remove(entry.path());
  }
  for (const auto& [name, text] : corpus.device_texts) write_file_atomic(snap / (name + ".cfg"), text);
  write_file_atomic(out / "truth.json", dump(to_json(corpus.truth)));

  Json counts = Json::object(), templates = Json::object();
  std::size_t total = 0;
  for (auto k : kAllPropertyKinds) {
    const auto n = corpus.property_counts.count(k) ? corpus.property_counts.at(k) : 0;
    counts[std::string(to_string(k))] = n;
    total += n;
    templates[std::string(to_string(k))] = corpus.templates.count(k) ? corpus.templates.at(k) : std::vector<std::string>{};
  }
  Json injected = Json::object();
  for (const auto& [t, n] : corpus.truth.injected_count) injected[std::string(to_string(t))] = n;
  const Json manifest{{"spec", to_json(spec)},
                      {"device_count", corpus.device_texts.size()},
                      {"property_count", total},
                      {"property_count_by_kind", counts},
                      {"template_count", [&] {
                         std::size_t n = 0;
                         for (const auto& [k, v] : corpus.templates) n += v.size();
                         return n;
                       }()},
                      {"templates", templates},
                      {"injected_count", injected},
                      {"buggy_count", corpus.truth.buggy_count()},
                      {"snapshot_id", corpus.snapshot.snapshot_id}};
  write_file_atomic(out / "generator-manifest.json", dump(manifest));
}

}  // namespace netsig
