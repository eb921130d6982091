#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "netsig/detectors.hpp"
#include "netsig/properties.hpp"

namespace netsig {

struct SeverityWeights {
  std::map<ProblemType, double> problem_type_weight{
      {ProblemType::UndefinedReference, 1.0},       {ProblemType::ShadowedRule, 0.8},
      {ProblemType::InconsistentAcrossDevices, 0.6}, {ProblemType::DeviantAttributeValue, 0.4},
      {ProblemType::Unknown, 0.2}};
  double alpha = 0.1;  // blast radius scale
  double beta = 1.0;   // outlier weight

  double weight(ProblemType t) const;
  // Throws Error{InvalidConfig} on negative or non-finite values.
  void validate() const;
  bool operator==(const SeverityWeights&) const = default;
};

// Reads `key = value` lines: alpha, beta, and weight.<ProblemType>. '#' starts a comment.
SeverityWeights load_severity_weights(const std::filesystem::path& path);
SeverityWeights parse_severity_weights(std::string_view text);

// beta * (outlier_score / threshold) * weight[problem_type] * (1 + alpha * blast_radius).
// Throws Error{UnknownProperty} when the finding's property is not in the graph.
double compute_severity(const Finding& finding, const ReferenceGraph& graph, const SeverityWeights& weights);

// Fills blast_radius and severity on every finding.
void apply_severity(std::vector<Finding>& findings, const ReferenceGraph& graph, const SeverityWeights& weights);

enum class RankMode { Outlier, Severity };
std::string_view to_string(RankMode m);

// Sorts descending by the mode's score; ties by problem-type weight (desc),
// then property id (asc). Fills rank 1..n. Throws Error{MissingSeverity}.
std::vector<Finding> rank(std::vector<Finding> findings, RankMode mode, const SeverityWeights& weights);

// Kendall tau-a between two orderings of the same property ids.
double kendall_tau(const std::vector<std::string>& order_a, const std::vector<std::string>& order_b);

}  // namespace netsig
