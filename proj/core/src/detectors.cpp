#include "netsig/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "netsig/error.hpp"

namespace netsig {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Signature: return "signature";
    case Method::ZScore: return "zscore";
    case Method::ModifiedZScore: return "modified_zscore";
    case Method::Gmm: return "gmm";
  }
  return "?";
}

std::optional<Method> method_from_string(std::string_view s) {
  for (auto m : {Method::Signature, Method::ZScore, Method::ModifiedZScore, Method::Gmm}) {
    if (to_string(m) == s) return m;
  }
  if (s == "modz") return Method::ModifiedZScore;
  return std::nullopt;
}

std::string_view to_string(ProblemType t) {
  switch (t) {
    case ProblemType::UndefinedReference: return "UndefinedReference";
    case ProblemType::DeviantAttributeValue: return "DeviantAttributeValue";
    case ProblemType::InconsistentAcrossDevices: return "InconsistentAcrossDevices";
    case ProblemType::ShadowedRule: return "ShadowedRule";
    case ProblemType::Unknown: return "Unknown";
  }
  return "?";
}

std::optional<ProblemType> problem_type_from_string(std::string_view s) {
  for (auto t : kAllProblemTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

void DetectorConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
  if (!(zscore_threshold > 0)) fail("zscore_threshold must be > 0");
  if (!(modz_threshold > 0)) fail("modz_threshold must be > 0");
  if (gmm_components < 1) fail("gmm_components must be >= 1");
  if (gmm_max_iters < 1) fail("gmm_max_iters must be >= 1");
  if (!(gmm_tol > 0)) fail("gmm_tol must be > 0");
  if (!(gmm_outlier_percentile > 0 && gmm_outlier_percentile < 50)) fail("gmm_outlier_percentile must be in (0, 50)");
}

bool has_shadowed_rule(const Property& property) {
  if (property.kind != PropertyKind::Acl) return false;
  const auto* rules = property.attr<AclRuleList>("rules");
  if (!rules) return false;
  for (std::size_t i = 1; i < rules->size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if ((*rules)[j].action != (*rules)[i].action && (*rules)[j].covers((*rules)[i])) return true;
    }
  }
  return false;
}

ProblemType classify_problem(const CorpusBundle& bundle, const Property& property,
                             const std::vector<DeviantFeature>& deviant) {
  if (bundle.graph.has_dangling(property.id)) return ProblemType::UndefinedReference;

  const auto* self = bundle.vector(property.id);
  auto peers = bundle.by_name.find({property.kind, property.name});
  if (self && peers != bundle.by_name.end() && peers->second.size() > 1) {
    const auto& schema = feature_schema(property.kind);
    for (const auto& d : deviant) {
      if (d.numeric) continue;
      const int slot = schema.slot(d.feature);
      if (slot < 0) continue;
      const auto value = self->categorical[static_cast<std::size_t>(slot)];
      for (auto idx : peers->second) {
        if (bundle.vectors[idx].categorical[static_cast<std::size_t>(slot)] != value) {
          return ProblemType::InconsistentAcrossDevices;
        }
      }
    }
  }
  if (has_shadowed_rule(property)) return ProblemType::ShadowedRule;
  return ProblemType::DeviantAttributeValue;
}

namespace {

void sort_by_property(std::vector<Finding>& findings) {
  std::sort(findings.begin(), findings.end(),
            [](const Finding& a, const Finding& b) { return a.property_id < b.property_id; });
}

std::map<PropertyKind, std::vector<std::size_t>> indices_by_kind(const CorpusBundle& bundle) {
  std::map<PropertyKind, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < bundle.properties.size(); ++i) out[bundle.properties[i].kind].push_back(i);
  return out;
}

double finite_score(double s) { return std::isinf(s) ? kUnboundedScore : s; }

// Per-feature baseline protocol shared by the Z and modified-Z detectors.
template <typename Scorer, typename Summary>
std::vector<Finding> per_feature_baseline(const CorpusBundle& bundle, Method method, double threshold,
                                          Scorer scorer, Summary summary) {
  std::vector<Finding> findings;
  for (const auto& [kind, idx] : indices_by_kind(bundle)) {
    if (idx.size() < 2) continue;
    const auto& schema = feature_schema(kind);
    std::vector<std::vector<DeviantFeature>> deviant(idx.size());
    std::size_t slot = 0;
    for (const auto& f : schema.features) {
      if (!is_numeric(f.type)) continue;
      std::vector<double> series(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) series[i] = bundle.vectors[idx[i]].numeric[slot];
      const auto scores = scorer(series);
      const std::string expected = summary(series);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (scores[i] > threshold) {
          deviant[i].push_back({f.name, true, fmt::format("{}", series[i]), expected, finite_score(scores[i])});
        }
      }
      ++slot;
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (deviant[i].empty()) continue;
      const auto& p = bundle.properties[idx[i]];
      Finding f;
      f.property_id = p.id;
      f.kind = kind;
      f.detector = method;
      f.threshold = threshold;
      for (const auto& d : deviant[i]) f.outlier_score = std::max(f.outlier_score, d.deviation);
      f.deviant_features = std::move(deviant[i]);
      f.problem_type = classify_problem(bundle, p, f.deviant_features);
      findings.push_back(std::move(f));
    }
  }
  sort_by_property(findings);
  return findings;
}

}  // namespace

std::vector<Finding> detect_signature_outliers(const CorpusBundle& bundle, const SignatureSet& set) {
  std::vector<Finding> findings;
  for (std::size_t i = 0; i < bundle.properties.size(); ++i) {
    const auto& p = bundle.properties[i];
    const auto& v = bundle.vectors[i];
    if (v.schema_version != set.schema_version) {
      throw Error(ErrorCode::GenerationMismatch,
                  fmt::format("{} encoded with schema v{}, signatures use v{}", p.id, v.schema_version,
                              set.schema_version));
    }
    auto a = set.assignment.find(p.id);
    if (a == set.assignment.end() || a->second == kUnclustered) continue;
    const Signature* sig = set.find(a->second);
    if (!sig) throw Error(ErrorCode::UnknownSignature, a->second);
    if (sig->suppressed.count(p.id)) continue;

    std::vector<DeviantFeature> deviant;
    double max_dev = 0;
    for (auto& d : feature_deviations(v, *sig, bundle.tokens, set.params)) {
      auto wl = sig->whitelist.find(d.feature);
      if (wl != sig->whitelist.end() && wl->second.count(d.observed)) continue;
      max_dev = std::max(max_dev, d.deviation);
      if (d.deviation > sig->threshold) {
        deviant.push_back({d.feature, d.numeric, d.observed, d.expected, d.deviation});
      }
    }
    if (!(max_dev > sig->threshold)) continue;
    Finding f;
    f.property_id = p.id;
    f.kind = p.kind;
    f.detector = Method::Signature;
    f.outlier_score = max_dev;
    f.threshold = sig->threshold;
    f.violated_signature = sig->id;
    f.deviant_features = std::move(deviant);
    f.problem_type = classify_problem(bundle, p, f.deviant_features);
    findings.push_back(std::move(f));
  }
  sort_by_property(findings);
  return findings;
}

std::vector<Finding> detect_zscore(const CorpusBundle& bundle, const DetectorConfig& config) {
  config.validate();
  return per_feature_baseline(
      bundle, Method::ZScore, config.zscore_threshold,
      [](const std::vector<double>& s) { return stats::score_zscore(s); },
      [](const std::vector<double>& s) {
        double mean = 0;
        for (double x : s) mean += x;
        mean /= static_cast<double>(s.size());
        return fmt::format("mean {}", mean);
      });
}

std::vector<Finding> detect_modified_zscore(const CorpusBundle& bundle, const DetectorConfig& config) {
  config.validate();
  return per_feature_baseline(
      bundle, Method::ModifiedZScore, config.modz_threshold,
      [](const std::vector<double>& s) { return stats::score_modified_zscore(s); },
      [](const std::vector<double>& s) { return fmt::format("median {}", stats::median(s)); });
}

stats::Matrix gmm_design_matrix(const CorpusBundle& bundle, PropertyKind kind,
                                std::vector<std::size_t>* property_indices) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < bundle.properties.size(); ++i) {
    if (bundle.properties[i].kind == kind) idx.push_back(i);
  }
  const auto& schema = feature_schema(kind);
  const auto cat = schema.categorical_count();
  std::vector<std::map<TokenId, double>> freq(cat);
  for (auto i : idx) {
    for (std::size_t j = 0; j < cat; ++j) freq[j][bundle.vectors[i].categorical[j]] += 1.0;
  }
  stats::Matrix rows;
  rows.reserve(idx.size());
  for (auto i : idx) {
    const auto& v = bundle.vectors[i];
    std::vector<double> row = v.numeric;
    for (std::size_t j = 0; j < cat; ++j) row.push_back(freq[j][v.categorical[j]] / static_cast<double>(idx.size()));
    rows.push_back(std::move(row));
  }
  if (property_indices) *property_indices = std::move(idx);
  return rows;
}

std::vector<Finding> detect_gmm(const CorpusBundle& bundle, const DetectorConfig& config) {
  config.validate();
  std::vector<Finding> findings;
  for (auto kind : kAllPropertyKinds) {
    std::vector<std::size_t> idx;
    auto rows = gmm_design_matrix(bundle, kind, &idx);
    if (rows.size() < 2) continue;
    stats::GmmConfig gc;
    gc.components = std::min<int>(config.gmm_components, static_cast<int>(rows.size()));
    gc.max_iters = config.gmm_max_iters;
    gc.tol = config.gmm_tol;
    gc.seed = config.seed;
    const auto model = stats::fit_gmm(rows, gc);
    const auto scores = stats::score_gmm(model, rows);
    const double cutoff = stats::percentile(scores, 100.0 - config.gmm_outlier_percentile);
    const double floor = *std::min_element(scores.begin(), scores.end());
    const auto resp = stats::responsibilities(model, rows);

    // Column names: numeric features, then categorical features (frequency-encoded).
    const auto& schema = feature_schema(kind);
    std::vector<const FeatureSpec*> columns;
    for (const auto& f : schema.features)
      if (is_numeric(f.type)) columns.push_back(&f);
    for (const auto& f : schema.features)
      if (!is_numeric(f.type)) columns.push_back(&f);

    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!(scores[i] > cutoff)) continue;
      const auto& p = bundle.properties[idx[i]];
      const auto c = static_cast<std::size_t>(
          std::max_element(resp[i].begin(), resp[i].end()) - resp[i].begin());
      std::vector<DeviantFeature> deviant;
      DeviantFeature strongest;
      for (std::size_t d = 0; d < columns.size(); ++d) {
        const double z = std::abs(rows[i][d] - model.means[c][d]) / std::sqrt(model.variances[c][d]);
        DeviantFeature df{columns[d]->name, is_numeric(columns[d]->type), fmt::format("{}", rows[i][d]),
                          fmt::format("component {} mean {}", c, model.means[c][d]), z};
        if (z > 3.0) deviant.push_back(df);
        if (z > strongest.deviation) strongest = df;
      }
      if (deviant.empty()) deviant.push_back(strongest);
      Finding f;
      f.property_id = p.id;
      f.kind = kind;
      f.detector = Method::Gmm;
      f.outlier_score = scores[i] - floor;
      f.threshold = cutoff - floor;
      f.deviant_features = std::move(deviant);
      f.problem_type = classify_problem(bundle, p, f.deviant_features);
      findings.push_back(std::move(f));
    }
  }
  sort_by_property(findings);
  return findings;
}

std::vector<Finding> run_detector(const DetectorConfig& config, const CorpusBundle& bundle, const SignatureSet* set) {
  config.validate();
  switch (config.method) {
    case Method::Signature: {
      if (set) return detect_signature_outliers(bundle, *set);
      MiningParams params;
      params.seed = config.seed;
      return detect_signature_outliers(bundle, mine_signatures(bundle.view(), params));
    }
    case Method::ZScore: return detect_zscore(bundle, config);
    case Method::ModifiedZScore: return detect_modified_zscore(bundle, config);
    case Method::Gmm: return detect_gmm(bundle, config);
  }
  return {};
}

}  // namespace netsig
