#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netsig/pipeline.hpp"
#include "netsig/signatures.hpp"
#include "netsig/stats.hpp"

namespace netsig {

enum class Method { Signature, ZScore, ModifiedZScore, Gmm };
std::string_view to_string(Method m);
std::optional<Method> method_from_string(std::string_view s);

struct DetectorConfig {
  Method method = Method::Signature;
  double zscore_threshold = 3.0;
  double modz_threshold = 3.5;
  int gmm_components = 3;
  int gmm_max_iters = 200;
  double gmm_tol = 1e-6;
  double gmm_outlier_percentile = 5.0;
  std::uint64_t seed = 0;

  // Throws Error{InvalidConfig}.
  void validate() const;
};

enum class ProblemType { UndefinedReference, DeviantAttributeValue, InconsistentAcrossDevices, ShadowedRule, Unknown };
inline constexpr ProblemType kAllProblemTypes[] = {
    ProblemType::UndefinedReference, ProblemType::DeviantAttributeValue, ProblemType::InconsistentAcrossDevices,
    ProblemType::ShadowedRule, ProblemType::Unknown};
std::string_view to_string(ProblemType t);
std::optional<ProblemType> problem_type_from_string(std::string_view s);

struct DeviantFeature {
  std::string feature;
  bool numeric = true;
  std::string observed;
  std::string expected;
  double deviation = 0;
  bool operator==(const DeviantFeature&) const = default;
};

// Scores that are unbounded (modified Z with MAD = 0) are reported with this finite value.
inline constexpr double kUnboundedScore = 1e6;

struct Finding {
  std::string property_id;
  PropertyKind kind = PropertyKind::Acl;
  Method detector = Method::Signature;
  double outlier_score = 0;
  double threshold = 0;  // the threshold outlier_score was compared against
  std::optional<std::string> violated_signature;
  std::vector<DeviantFeature> deviant_features;
  ProblemType problem_type = ProblemType::Unknown;
  std::optional<std::size_t> blast_radius;
  std::optional<double> severity;
  std::optional<std::size_t> rank;
  bool operator==(const Finding&) const = default;
};

// Problem classification in priority order: dangling reference, categorical
// value not shared by every device holding the same-named property, ACL entry
// shadowed by an earlier opposite-action entry, otherwise a deviant value.
ProblemType classify_problem(const CorpusBundle& bundle, const Property& property,
                             const std::vector<DeviantFeature>& deviant);

// True when some ACL entry is fully covered by an earlier entry with the opposite action.
bool has_shadowed_rule(const Property& property);

// Throws Error{GenerationMismatch} when vectors and set disagree on schema version.
std::vector<Finding> detect_signature_outliers(const CorpusBundle& bundle, const SignatureSet& set);

std::vector<Finding> detect_zscore(const CorpusBundle& bundle, const DetectorConfig& config);
std::vector<Finding> detect_modified_zscore(const CorpusBundle& bundle, const DetectorConfig& config);
std::vector<Finding> detect_gmm(const CorpusBundle& bundle, const DetectorConfig& config);

// Dispatches on config.method. For Method::Signature, `set` is used when
// given; otherwise signatures are mined with default parameters and config.seed.
std::vector<Finding> run_detector(const DetectorConfig& config, const CorpusBundle& bundle,
                                  const SignatureSet* set = nullptr);

// Baseline GMM design matrix for one kind: numeric features followed by
// categorical features encoded as their frequency within the kind.
stats::Matrix gmm_design_matrix(const CorpusBundle& bundle, PropertyKind kind,
                                std::vector<std::size_t>* property_indices = nullptr);

}  // namespace netsig
