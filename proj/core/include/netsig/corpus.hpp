#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "netsig/detectors.hpp"
#include "netsig/ingest.hpp"
#include "netsig/properties.hpp"

namespace netsig {

struct CorpusSpec {
  std::size_t node_count = 150;
  std::map<PropertyKind, std::size_t> properties_per_node{
      {PropertyKind::Acl, 10}, {PropertyKind::RouteFilter, 16}, {PropertyKind::Vrf, 6}, {PropertyKind::RoutingPolicy, 8}};
  std::map<PropertyKind, std::size_t> template_count{
      {PropertyKind::Acl, 6}, {PropertyKind::RouteFilter, 8}, {PropertyKind::Vrf, 3}, {PropertyKind::RoutingPolicy, 3}};
  // Fraction of all properties receiving each bug type.
  std::map<ProblemType, double> bug_injection{{ProblemType::UndefinedReference, 0.015},
                                              {ProblemType::DeviantAttributeValue, 0.015},
                                              {ProblemType::InconsistentAcrossDevices, 0.01},
                                              {ProblemType::ShadowedRule, 0.01}};
  // Fraction of properties receiving a legitimate (clean-labeled) local variation.
  double benign_variation_rate = 0.02;
  std::size_t interfaces_per_node = 4;
  std::size_t bgp_neighbors_per_node = 2;
  std::uint64_t seed = 20240601;

  // Throws Error{InfeasibleSpec}.
  void validate() const;
  std::size_t total_properties() const;
};

struct TruthLabel {
  bool buggy = false;
  ProblemType problem_type = ProblemType::Unknown;  // meaningful when buggy
  std::string template_label;                       // "<kind>:<template base name>"
  bool benign_variation = false;
  bool operator==(const TruthLabel&) const = default;
};

struct InjectedDangling {
  std::string property_id;
  std::string missing_name;
  bool operator==(const InjectedDangling&) const = default;
};

struct GroundTruth {
  std::map<std::string, TruthLabel> labels;
  std::map<ProblemType, std::size_t> injected_count;
  std::vector<InjectedDangling> injected_dangling;

  std::size_t buggy_count() const;
  bool operator==(const GroundTruth&) const = default;
};

struct GeneratedCorpus {
  NetworkSnapshot snapshot;
  GroundTruth truth;
  std::map<std::string, std::string> device_texts;  // device name -> .cfg text
  std::map<PropertyKind, std::size_t> property_counts;
  std::map<PropertyKind, std::vector<std::string>> templates;  // base names per kind
};

GeneratedCorpus generate_corpus(const CorpusSpec& spec);

// Writes <out>/snapshot/<device>.cfg, <out>/truth.json and <out>/generator-manifest.json.
void write_corpus(const GeneratedCorpus& corpus, const CorpusSpec& spec, const std::filesystem::path& out);

}  // namespace netsig
