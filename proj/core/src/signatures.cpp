#include "netsig/signatures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "netsig/error.hpp"

namespace netsig {

namespace {

double median_of(std::vector<double> xs) {
  const auto n = xs.size();
  if (n == 0) return 0.0;
  std::sort(xs.begin(), xs.end());
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

NumericStats numeric_stats_of(const std::vector<double>& xs) {
  NumericStats s;
  if (xs.empty()) return s;
  s.median = median_of(xs);
  std::vector<double> abs_dev;
  abs_dev.reserve(xs.size());
  for (double x : xs) abs_dev.push_back(std::abs(x - s.median));
  s.mad = median_of(std::move(abs_dev));
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
  return s;
}

double prototype_distance(const Signature& a, const Signature& b, const FeatureSchema& schema,
                          const MiningParams& params) {
  double total = 0, weights = 0;
  std::size_t num = 0, cat = 0;
  for (const auto& f : schema.features) {
    const double w = params.weight(f.name);
    double d;
    if (is_numeric(f.type)) {
      const auto& sa = a.numeric_stats[num];
      const auto& sb = b.numeric_stats[num];
      d = std::abs(sa.median - sb.median) / std::max({sa.mad, sb.mad, params.mad_epsilon});
      ++num;
    } else {
      d = a.mode(cat) == b.mode(cat) ? 0.0 : 1.0;
      ++cat;
    }
    total += w * d;
    weights += w;
  }
  return weights > 0 ? total / weights : 0.0;
}

struct Cluster {
  std::vector<const FeatureVector*> members;
  Signature proto;
};

// Agglomerative merging of one name-template group, starting from its distinct vectors.
std::vector<Cluster> cluster_group(const std::vector<const FeatureVector*>& group, PropertyKind kind,
                                   const TokenTable& tokens, const MiningParams& params) {
  const auto& schema = feature_schema(kind);
  std::vector<Cluster> clusters;
  {
    std::map<std::pair<std::vector<double>, std::vector<TokenId>>, std::size_t> distinct;
    for (const auto* v : group) {
      auto [it, inserted] = distinct.try_emplace({v->numeric, v->categorical}, clusters.size());
      if (inserted) clusters.push_back({});
      clusters[it->second].members.push_back(v);
    }
  }
  for (auto& c : clusters) c.proto = compute_signature_stats(kind, c.members, tokens);

  const auto n0 = clusters.size();
  std::vector<std::vector<double>> dist(n0, std::vector<double>(n0, 0.0));
  std::vector<char> alive(n0, 1);
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = i + 1; j < n0; ++j) {
      dist[i][j] = dist[j][i] = prototype_distance(clusters[i].proto, clusters[j].proto, schema, params);
    }
  }
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n0; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n0; ++j) {
        if (alive[j] && dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    if (!(best < params.merge_distance)) break;
    auto& into = clusters[bi].members;
    into.insert(into.end(), clusters[bj].members.begin(), clusters[bj].members.end());
    clusters[bj].members.clear();
    alive[bj] = 0;
    clusters[bi].proto = compute_signature_stats(kind, into, tokens);
    for (std::size_t k = 0; k < n0; ++k) {
      if (alive[k] && k != bi) {
        dist[bi][k] = dist[k][bi] = prototype_distance(clusters[bi].proto, clusters[k].proto, schema, params);
      }
    }
  }
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < n0; ++i) {
    if (alive[i]) out.push_back(std::move(clusters[i]));
  }
  for (auto& c : out) {
    std::sort(c.members.begin(), c.members.end(),
              [](const FeatureVector* a, const FeatureVector* b) { return a->property_id < b->property_id; });
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
    return a.members.front()->property_id < b.members.front()->property_id;
  });
  return out;
}

}  // namespace

const std::string& Signature::mode(std::size_t slot) const {
  static const std::string missing(kMissingToken);
  const auto& freq = categorical_stats.at(slot);
  const std::string* best = &missing;
  std::size_t best_count = 0;
  for (const auto& [value, count] : freq) {
    if (count > best_count) {
      best = &value;
      best_count = count;
    }
  }
  return *best;
}

bool Signature::is_common(std::size_t slot, const std::string& value, double common_fraction) const {
  const auto& freq = categorical_stats.at(slot);
  auto it = freq.find(value);
  const double count = it == freq.end() ? 0.0 : static_cast<double>(it->second);
  return count >= common_fraction * static_cast<double>(member_count);
}

const Signature* SignatureSet::find(std::string_view id) const {
  auto it = std::lower_bound(signatures.begin(), signatures.end(), id,
                             [](const Signature& s, std::string_view key) { return s.id < key; });
  return it != signatures.end() && it->id == id ? &*it : nullptr;
}

Signature* SignatureSet::find(std::string_view id) {
  return const_cast<Signature*>(std::as_const(*this).find(id));
}

Signature compute_signature_stats(PropertyKind kind, std::span<const FeatureVector* const> members,
                                  const TokenTable& tokens) {
  const auto& schema = feature_schema(kind);
  std::vector<const FeatureVector*> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const FeatureVector* a, const FeatureVector* b) { return a->property_id < b->property_id; });
  Signature sig;
  sig.kind = kind;
  sig.member_count = sorted.size();
  for (const auto* v : sorted) {
    if (v->kind != kind) throw Error(ErrorCode::KindMismatch, v->property_id);
    sig.members.push_back(v->property_id);
  }
  const auto num = schema.numeric_count();
  const auto cat = schema.categorical_count();
  sig.numeric_stats.resize(num);
  sig.categorical_stats.resize(cat);
  std::vector<double> xs(sorted.size());
  for (std::size_t i = 0; i < num; ++i) {
    for (std::size_t m = 0; m < sorted.size(); ++m) xs[m] = sorted[m]->numeric.at(i);
    sig.numeric_stats[i] = numeric_stats_of(xs);
  }
  for (std::size_t j = 0; j < cat; ++j) {
    for (const auto* v : sorted) sig.categorical_stats[j][tokens.token(v->categorical.at(j))]++;
  }
  const int name_slot = schema.slot("name_template_class");
  if (name_slot >= 0 && cat > 0) sig.name_template = sig.mode(static_cast<std::size_t>(name_slot));
  return sig;
}

namespace {

// Alternates nearest-prototype assignment with recomputing each signature from
// its assigned members until the assignment is stable, so that members, stats
// and assignment agree. Candidates are the signatures mined from the vector's
// own name-template group; letting groups compete lets one large signature
// absorb neighbouring templates round after round. Signatures left with fewer
// than min_cluster_size members are dropped and their vectors reassigned.
void refine_assignment(SignatureSet& set, const std::vector<const FeatureVector*>& vectors, const TokenTable& tokens) {
  constexpr int kMaxRounds = 50;
  std::map<std::string, std::string> previous;
  for (int round = 0;; ++round) {
    std::map<std::string, std::string> current;
    std::map<std::string, std::vector<const FeatureVector*>> members;
    for (const auto* v : vectors) {
      const auto slot = static_cast<std::size_t>(feature_schema(v->kind).slot("name_template_class"));
      const auto& name_template = tokens.token(v->categorical.at(slot));
      std::string id(kUnclustered);
      double best = 0;
      for (const auto& sig : set.signatures) {
        if (sig.kind != v->kind || sig.name_template != name_template) continue;
        const double d = signature_distance(*v, sig, tokens, set.params);
        if (id == kUnclustered || d < best) {
          id = sig.id;
          best = d;
        }
      }
      current[v->property_id] = id;
      if (id != kUnclustered) members[id].push_back(v);
    }
    std::vector<Signature> kept;
    std::set<std::string> dropped;
    for (auto& sig : set.signatures) {
      auto& m = members[sig.id];
      if (m.size() < set.params.min_cluster_size) {
        dropped.insert(sig.id);
        continue;
      }
      Signature next = compute_signature_stats(sig.kind, m, tokens);
      next.id = sig.id;
      next.name_template = sig.name_template;
      next.threshold = sig.threshold;
      kept.push_back(std::move(next));
    }
    set.signatures = std::move(kept);
    const bool settled = dropped.empty() && current == previous;
    if (settled || round + 1 == kMaxRounds) {
      if (!settled) {
        set.diagnostics.push_back({Level::Warning, "AssignmentUnsettled", "", 0,
                                   fmt::format("assignment still changing after {} rounds", kMaxRounds), {}});
      }
      for (auto& [id, sid] : current) {
        if (dropped.count(sid)) sid = std::string(kUnclustered);
        set.assignment[id] = sid;
      }
      return;
    }
    previous = std::move(current);
  }
}

}  // namespace

SignatureSet mine_signatures(const EncodedView& corpus, const MiningParams& params) {
  if (params.min_cluster_size < 1) throw Error(ErrorCode::InvalidConfig, "min_cluster_size must be >= 1");
  SignatureSet set;
  set.params = params;

  std::map<PropertyKind, std::vector<const FeatureVector*>> by_kind;
  for (const auto& v : corpus.vectors) {
    if (v.schema_version != kSchemaVersion) {
      throw Error(ErrorCode::GenerationMismatch, fmt::format("{} encoded with schema v{}", v.property_id, v.schema_version));
    }
    by_kind[v.kind].push_back(&v);
  }

  // Name-template groups that produced at least one signature, per kind.
  std::map<PropertyKind, std::set<std::string>> covered_groups;
  std::map<PropertyKind, std::map<std::string, std::vector<const FeatureVector*>>> groups_by_kind;

  for (auto& [kind, vectors] : by_kind) {
    if (vectors.size() < params.min_cluster_size) {
      set.diagnostics.push_back({Level::Warning, "TooFewProperties", "", 0,
                                 fmt::format("kind {} has {} properties (< {}); not mined", to_string(kind),
                                             vectors.size(), params.min_cluster_size),
                                 {std::string(to_string(kind))}});
      continue;
    }
    set.mined_kinds.insert(kind);
    std::sort(vectors.begin(), vectors.end(),
              [](const FeatureVector* a, const FeatureVector* b) { return a->property_id < b->property_id; });
    const auto slot = static_cast<std::size_t>(feature_schema(kind).slot("name_template_class"));
    auto& groups = groups_by_kind[kind];
    for (const auto* v : vectors) groups[corpus.tokens.token(v->categorical.at(slot))].push_back(v);

    std::size_t index = 0;
    for (const auto& [name_template, group] : groups) {
      for (auto& cluster : cluster_group(group, kind, corpus.tokens, params)) {
        if (cluster.members.size() < params.min_cluster_size) continue;
        Signature sig = std::move(cluster.proto);
        sig.id = fmt::format("{}-{:04}", to_string(kind), index++);
        sig.name_template = name_template;
        sig.threshold = params.default_threshold;
        set.signatures.push_back(std::move(sig));
        covered_groups[kind].insert(name_template);
      }
    }
  }
  std::sort(set.signatures.begin(), set.signatures.end(),
            [](const Signature& a, const Signature& b) { return a.id < b.id; });

  // Vectors in template groups that produced a signature; the rest are unclustered.
  std::vector<const FeatureVector*> clustered;
  for (const auto& [kind, groups] : groups_by_kind) {
    const auto& covered = covered_groups[kind];
    for (const auto& [name_template, group] : groups) {
      if (covered.count(name_template)) {
        clustered.insert(clustered.end(), group.begin(), group.end());
        continue;
      }
      set.diagnostics.push_back({Level::Info, "Unclustered", "", 0,
                                 fmt::format("{} {} properties with name template '{}' have no signature",
                                             group.size(), to_string(kind), name_template),
                                 {std::string(to_string(kind)), name_template}});
      for (const auto* v : group) set.assignment[v->property_id] = std::string(kUnclustered);
    }
  }
  refine_assignment(set, clustered, corpus.tokens);
  return set;
}

std::vector<FeatureDeviation> feature_deviations(const FeatureVector& v, const Signature& sig,
                                                 const TokenTable& tokens, const MiningParams& params) {
  if (v.kind != sig.kind) throw Error(ErrorCode::KindMismatch, v.property_id + " vs " + sig.id);
  const auto& schema = feature_schema(v.kind);
  std::vector<FeatureDeviation> out;
  out.reserve(schema.features.size());
  std::size_t num = 0, cat = 0;
  for (const auto& f : schema.features) {
    FeatureDeviation d;
    d.feature = f.name;
    if (is_numeric(f.type)) {
      const double x = v.numeric.at(num);
      const auto& s = sig.numeric_stats.at(num);
      d.numeric = true;
      d.observed = fmt::format("{}", x);
      d.expected = fmt::format("median {} (MAD {})", s.median, s.mad);
      d.deviation = std::abs(x - s.median) / std::max(s.mad, params.mad_epsilon);
      d.indicator = d.deviation;
      ++num;
    } else {
      const auto& value = tokens.token(v.categorical.at(cat));
      d.numeric = false;
      d.observed = value;
      d.expected = sig.mode(cat);
      d.indicator = sig.is_common(cat, value, params.common_fraction) ? 0.0 : 1.0;
      d.deviation = d.indicator * params.categorical_deviation;
      ++cat;
    }
    out.push_back(std::move(d));
  }
  return out;
}

double signature_distance(const FeatureVector& v, const Signature& sig, const TokenTable& tokens,
                          const MiningParams& params) {
  double total = 0, weights = 0;
  for (const auto& d : feature_deviations(v, sig, tokens, params)) {
    const double w = params.weight(d.feature);
    total += w * d.indicator;
    weights += w;
  }
  return weights > 0 ? total / weights : 0.0;
}

Assignment assign(const FeatureVector& v, const SignatureSet& set, const TokenTable& tokens) {
  std::optional<Assignment> best;
  for (const auto& sig : set.signatures) {
    if (sig.kind != v.kind) continue;
    const double d = signature_distance(v, sig, tokens, set.params);
    if (!best || d < best->distance) best = Assignment{sig.id, d};
  }
  if (!best) throw Error(ErrorCode::KindNotMined, std::string(to_string(v.kind)));
  return *best;
}

std::vector<SignatureReportRow> signature_report(const SignatureSet& set) {
  std::vector<SignatureReportRow> rows;
  for (const auto& sig : set.signatures) {
    const auto& schema = feature_schema(sig.kind);
    // Dispersion among members: numeric stddev over the MAD floor, categorical share outside the mode.
    std::vector<std::pair<double, std::string>> spread;
    std::size_t num = 0, cat = 0;
    for (const auto& f : schema.features) {
      double s;
      if (is_numeric(f.type)) {
        const auto& st = sig.numeric_stats[num++];
        s = st.stddev / std::max(st.mad, set.params.mad_epsilon);
      } else {
        const auto& freq = sig.categorical_stats[cat];
        const auto modal = freq.empty() ? 0 : freq.at(sig.mode(cat));
        ++cat;
        s = sig.member_count ? 1.0 - static_cast<double>(modal) / static_cast<double>(sig.member_count) : 0.0;
      }
      if (s > 0) spread.emplace_back(s, f.name);
    }
    std::stable_sort(spread.begin(), spread.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    SignatureReportRow row;
    row.signature_id = sig.id;
    row.kind = sig.kind;
    row.name_template = sig.name_template;
    row.member_count = sig.member_count;
    for (std::size_t i = 0; i < spread.size() && i < 3; ++i) row.top_deviant_features.push_back(spread[i].second);
    row.threshold = sig.threshold;
    for (const auto& [feature, values] : sig.whitelist) row.whitelist_size += values.size();
    row.suppressed_count = sig.suppressed.size();
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.member_count > b.member_count; });
  return rows;
}

}  // namespace netsig
