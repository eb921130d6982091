#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "netsig/encoder.hpp"
#include "netsig/ingest.hpp"
#include "netsig/properties.hpp"
#include "netsig/signatures.hpp"

namespace netsig {

// Everything derived from one snapshot that detectors, severity and retuning read.
// Immutable once built.
struct CorpusBundle {
  NetworkSnapshot snapshot;
  std::vector<Property> properties;
  ReferenceGraph graph;
  TokenTable tokens;
  std::vector<FeatureVector> vectors;  // parallel to properties
  std::unordered_map<std::string, std::size_t> index;
  std::map<std::pair<PropertyKind, std::string>, std::vector<std::size_t>> by_name;

  EncodedView view() const { return {vectors, tokens}; }
  const Property* property(std::string_view id) const;
  const FeatureVector* vector(std::string_view id) const;
};

CorpusBundle build_bundle(NetworkSnapshot snapshot);

}  // namespace netsig
