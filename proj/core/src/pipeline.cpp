#include "netsig/pipeline.hpp"

namespace netsig {

const Property* CorpusBundle::property(std::string_view id) const {
  auto it = index.find(std::string(id));
  return it == index.end() ? nullptr : &properties[it->second];
}

const FeatureVector* CorpusBundle::vector(std::string_view id) const {
  auto it = index.find(std::string(id));
  return it == index.end() ? nullptr : &vectors[it->second];
}

CorpusBundle build_bundle(NetworkSnapshot snapshot) {
  CorpusBundle b;
  b.snapshot = std::move(snapshot);
  b.properties = extract_properties(b.snapshot);
  b.graph = build_reference_graph(b.snapshot, b.properties);
  b.vectors.reserve(b.properties.size());
  for (std::size_t i = 0; i < b.properties.size(); ++i) {
    const auto& p = b.properties[i];
    b.vectors.push_back(encode(p, b.tokens));
    b.index.emplace(p.id, i);
    b.by_name[{p.kind, p.name}].push_back(i);
  }
  return b;
}

}  // namespace netsig
