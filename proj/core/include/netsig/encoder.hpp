#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netsig/properties.hpp"

namespace netsig {

inline constexpr int kSchemaVersion = 1;

// Placeholder token for categorical features whose source attribute is absent.
inline constexpr std::string_view kMissingToken = "<missing>";
// Token for bag-of-tokens features over an empty collection.
inline constexpr std::string_view kEmptyBagToken = "<none>";

enum class FeatureType { Numeric, Categorical, SetCardinality, BagOfTokens };

std::string_view to_string(FeatureType t);

// Numeric and set-cardinality features land in FeatureVector::numeric;
// categorical and bag-of-tokens features land in FeatureVector::categorical.
constexpr bool is_numeric(FeatureType t) {
  return t == FeatureType::Numeric || t == FeatureType::SetCardinality;
}

struct FeatureSpec {
  std::string name;
  FeatureType type;
  std::vector<std::string> sources;  // property attributes (or "name") the feature derives from
};

struct FeatureSchema {
  PropertyKind kind;
  std::string name;
  int version = kSchemaVersion;
  std::vector<FeatureSpec> features;

  std::size_t numeric_count() const;
  std::size_t categorical_count() const;

  // Position of `feature` inside its dense array (numeric or categorical), or -1.
  int slot(std::string_view feature) const;
  const FeatureSpec* find(std::string_view feature) const;
};

const FeatureSchema& feature_schema(PropertyKind kind);

using TokenId = std::uint32_t;

// Interns categorical tokens to dense ids. Safe to share across threads;
// concurrent interning behaves as if serialized.
class TokenTable {
 public:
  TokenTable() = default;
  TokenTable(const TokenTable& other);
  TokenTable& operator=(const TokenTable& other);

  TokenId intern(std::string_view token);
  const std::string& token(TokenId id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

inline TokenId intern_token(TokenTable& table, std::string_view token) { return table.intern(token); }

struct FeatureVector {
  std::string property_id;
  PropertyKind kind = PropertyKind::Acl;
  int schema_version = kSchemaVersion;
  std::vector<double> numeric;
  std::vector<TokenId> categorical;

  bool operator==(const FeatureVector&) const = default;
};

// Throws Error{EncodingOverflow} when a structural count exceeds 2^32.
FeatureVector encode(const Property& property, TokenTable& table);

// Attributes that `feature` of this vector's schema was derived from.
const std::vector<std::string>& provenance(const FeatureVector& vector, std::string_view feature);

}  // namespace netsig
