#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "netsig/encoder.hpp"
#include "netsig/ingest.hpp"

namespace netsig {

inline constexpr std::string_view kUnclustered = "unclustered";

struct MiningParams {
  std::size_t min_cluster_size = 3;
  double merge_distance = 2.0;
  // A categorical value is "common" when held by at least this fraction of members.
  double common_fraction = 0.1;
  // Floor on MAD when scaling numeric deviations; a one-unit change in a
  // zero-spread count feature scores 1 / 0.25 = 4 > 3.5.
  double mad_epsilon = 0.25;
  // Per-feature deviation reported for an uncommon categorical value.
  double categorical_deviation = 5.0;
  double default_threshold = 3.5;
  std::map<std::string, double> weights;  // feature name -> weight; absent means 1
  std::uint64_t seed = 0;

  double weight(const std::string& feature) const {
    auto it = weights.find(feature);
    return it == weights.end() ? 1.0 : it->second;
  }
  bool operator==(const MiningParams&) const = default;
};

struct NumericStats {
  double median = 0;
  double mad = 0;
  double mean = 0;
  double stddev = 0;
  bool operator==(const NumericStats&) const = default;
};

struct Signature {
  std::string id;
  PropertyKind kind = PropertyKind::Acl;
  std::string name_template;
  std::vector<std::string> members;  // sorted property ids the stats were computed from
  std::size_t member_count = 0;
  std::vector<NumericStats> numeric_stats;                       // per numeric slot
  std::vector<std::map<std::string, std::size_t>> categorical_stats;  // per categorical slot
  double threshold = 3.5;
  std::map<std::string, std::set<std::string>> whitelist;  // feature -> exempted values
  std::set<std::string> suppressed;

  bool operator==(const Signature&) const = default;

  // Most frequent value of a categorical slot; ties go to the smaller token.
  const std::string& mode(std::size_t slot) const;
  bool is_common(std::size_t slot, const std::string& value, double common_fraction) const;
};

struct SignatureSet {
  std::vector<Signature> signatures;              // sorted by id
  std::map<std::string, std::string> assignment;  // property id -> signature id or kUnclustered
  MiningParams params;
  std::uint64_t generation = 0;
  int schema_version = kSchemaVersion;
  std::vector<Diagnostic> diagnostics;  // skipped kinds, unclustered templates
  std::set<PropertyKind> mined_kinds;

  const Signature* find(std::string_view id) const;
  Signature* find(std::string_view id);
  bool operator==(const SignatureSet& o) const {
    return signatures == o.signatures && assignment == o.assignment && params == o.params &&
           generation == o.generation && schema_version == o.schema_version && mined_kinds == o.mined_kinds;
  }
};

// Encoded vectors plus the token table their categorical ids refer to.
struct EncodedView {
  std::span<const FeatureVector> vectors;
  const TokenTable& tokens;
};

// Stats over the given members (all of one kind). Used by mining and by merges.
Signature compute_signature_stats(PropertyKind kind, std::span<const FeatureVector* const> members,
                                  const TokenTable& tokens);

SignatureSet mine_signatures(const EncodedView& corpus, const MiningParams& params);

struct FeatureDeviation {
  std::string feature;
  bool numeric = true;
  std::string observed;
  std::string expected;
  double deviation = 0;    // detector scale: numeric |x-median|/max(MAD,eps), categorical 0 or categorical_deviation
  double indicator = 0;    // distance scale: numeric same as deviation, categorical 0 or 1
};

std::vector<FeatureDeviation> feature_deviations(const FeatureVector& v, const Signature& sig,
                                                 const TokenTable& tokens, const MiningParams& params);

double signature_distance(const FeatureVector& v, const Signature& sig, const TokenTable& tokens,
                          const MiningParams& params);

struct Assignment {
  std::string signature_id;
  double distance = 0;
};

// Nearest signature of the vector's kind. Throws Error{KindNotMined}.
Assignment assign(const FeatureVector& v, const SignatureSet& set, const TokenTable& tokens);

struct SignatureReportRow {
  std::string signature_id;
  PropertyKind kind;
  std::string name_template;
  std::size_t member_count = 0;
  std::vector<std::string> top_deviant_features;
  double threshold = 0;
  std::size_t whitelist_size = 0;
  std::size_t suppressed_count = 0;
};

std::vector<SignatureReportRow> signature_report(const SignatureSet& set);

}  // namespace netsig
