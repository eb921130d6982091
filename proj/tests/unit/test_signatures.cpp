#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "netsig/corpus.hpp"
#include "netsig/error.hpp"
#include "netsig/pipeline.hpp"
#include "netsig/signatures.hpp"
#include "test_support.hpp"

using namespace netsig;

namespace {

std::string acl_block(const std::string& name, int rules) {
  std::string s = "acl " + name + "\n";
  for (int i = 0; i < rules; ++i) s += " permit tcp 10.0." + std::to_string(i) + ".0/24 any eq 22\n";
  return s + " deny ip any any\n";
}

CorpusBundle acl_bundle(const std::vector<std::pair<std::string, int>>& acls) {
  std::string text;
  for (const auto& [name, rules] : acls) text += acl_block(name, rules);
  return build_bundle(make_snapshot({parse_config(text, "d")}));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

// Mixed distance recomputed from the stored stats without going through the library's deviation code.
double oracle_distance(const FeatureVector& v, const Signature& s, const TokenTable& tokens, const MiningParams& p) {
  double total = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.numeric.size(); ++i, ++n) {
    total += std::fabs(v.numeric[i] - s.numeric_stats[i].median) / std::max(s.numeric_stats[i].mad, p.mad_epsilon);
  }
  for (std::size_t i = 0; i < v.categorical.size(); ++i, ++n) {
    const auto& counts = s.categorical_stats[i];
    auto it = counts.find(tokens.token(v.categorical[i]));
    const double share = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(s.member_count);
    total += share >= p.common_fraction ? 0.0 : 1.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace

TEST(Mine, IdenticalVectorsFormOneSignature) {
  std::vector<std::pair<std::string, int>> acls;
  for (int i = 1; i <= 10; ++i) acls.emplace_back("ACL_SAME_" + std::to_string(i), 3);
  const auto b = acl_bundle(acls);
  const auto set = mine_signatures(b.view(), {});
  ASSERT_EQ(set.signatures.size(), 1u);
  EXPECT_EQ(set.signatures[0].member_count, 10u);
  for (const auto& s : set.signatures[0].numeric_stats) EXPECT_EQ(s.mad, 0.0);
}

TEST(Mine, WellSeparatedGroupsStaySeparate) {
  std::vector<std::pair<std::string, int>> acls;
  for (int i = 1; i <= 5; ++i) acls.emplace_back("ACL_G_" + std::to_string(i), 2);
  for (int i = 6; i <= 10; ++i) acls.emplace_back("ACL_G_" + std::to_string(i), 40);
  const auto set = mine_signatures(acl_bundle(acls).view(), {});
  ASSERT_EQ(set.signatures.size(), 2u);
  EXPECT_EQ(set.signatures[0].member_count, 5u);
  EXPECT_EQ(set.signatures[1].member_count, 5u);
}

TEST(Mine, SmallGroupsAreUnclusteredWithDiagnostic) {
  const auto b = acl_bundle({{"ACL_A_1", 2}, {"ACL_A_2", 2}, {"ACL_A_3", 2}, {"ACL_LONE_1", 2}});
  const auto set = mine_signatures(b.view(), {});
  EXPECT_EQ(set.assignment.at("d/acl/ACL_LONE_1"), kUnclustered);
  EXPECT_FALSE(set.diagnostics.empty());
}

TEST(Mine, TooFewPropertiesSkipsKind) {
  const auto b = acl_bundle({{"ACL_A_1", 2}, {"ACL_B_1", 2}});
  const auto set = mine_signatures(b.view(), {});
  EXPECT_TRUE(set.signatures.empty());
  EXPECT_FALSE(set.diagnostics.empty());
  TokenTable t;
  EXPECT_THROW(assign(b.vectors[0], set, b.tokens), Error);
}

TEST(Mine, PlantedTemplatesRecovered) {
  for (std::uint64_t seed : {20240601ull, 1ull, 2ull}) {
    CorpusSpec spec;
    spec.seed = seed;
    spec.benign_variation_rate = 0;
    const auto corpus = generate_corpus(spec);
    std::size_t planted = 0;
    for (const auto& [kind, names] : corpus.templates) planted += names.size();
    ASSERT_EQ(planted, 20u);
    const auto bundle = testing_support::bundle_of(corpus);
    const auto set = mine_signatures(bundle.view(), {});
    const double count = static_cast<double>(set.signatures.size());
    EXPECT_GE(count, 18.0) << "seed " << seed;
    EXPECT_LE(count, 22.0) << "seed " << seed;

    std::size_t majority = 0, total = 0;
    for (const auto& sig : set.signatures) {
      std::map<std::string, std::size_t> labels;
      for (const auto& m : sig.members) labels[corpus.truth.labels.at(m).template_label]++;
      std::size_t best = 0;
      for (const auto& [l, n] : labels) best = std::max(best, n);
      majority += best;
      total += sig.members.size();
    }
    EXPECT_GE(static_cast<double>(majority) / static_cast<double>(total), 0.95) << "seed " << seed;
  }
}

TEST(Assign, PrototypeHasZeroDistance) {
  std::vector<std::pair<std::string, int>> acls;
  for (int i = 1; i <= 6; ++i) acls.emplace_back("ACL_P_" + std::to_string(i), 4);
  const auto b = acl_bundle(acls);
  const auto set = mine_signatures(b.view(), {});
  const auto a = assign(b.vectors[0], set, b.tokens);
  EXPECT_EQ(a.signature_id, set.signatures[0].id);
  EXPECT_EQ(a.distance, 0.0);
}

TEST(Assign, MatchesExhaustiveNearestPrototype) {
  std::vector<std::pair<std::string, int>> acls;
  for (int i = 1; i <= 10; ++i) acls.emplace_back("ACL_T_" + std::to_string(i), 1 + i % 3);
  for (int i = 11; i <= 20; ++i) acls.emplace_back("ACL_T_" + std::to_string(i), 20 + i % 2);
  for (int i = 1; i <= 10; ++i) acls.emplace_back("ACL_U_" + std::to_string(i), 8 + i % 2);
  const auto b = acl_bundle(acls);
  const auto set = mine_signatures(b.view(), {});
  ASSERT_EQ(set.signatures.size(), 3u);
  ASSERT_EQ(b.vectors.size(), 30u);
  for (const auto& v : b.vectors) {
    const auto got = assign(v, set, b.tokens);
    double best = INFINITY;
    for (const auto& s : set.signatures) best = std::min(best, oracle_distance(v, s, b.tokens, set.params));
    EXPECT_NEAR(got.distance, best, 1e-12) << v.property_id;
    for (const auto& s : set.signatures) {
      EXPECT_LE(got.distance, signature_distance(v, s, b.tokens, set.params) + 1e-15);
      EXPECT_TRUE(std::isfinite(signature_distance(v, s, b.tokens, set.params)));
    }
  }
}

TEST(Invariants, StatsConsistentWithMembers) {
  const auto corpus = generate_corpus(testing_support::small_spec(21, 30));
  const auto bundle = testing_support::bundle_of(corpus);
  const auto set = mine_signatures(bundle.view(), {});
  ASSERT_FALSE(set.signatures.empty());
  std::size_t assigned = 0;
  for (const auto& sig : set.signatures) {
    EXPECT_GE(sig.member_count, set.params.min_cluster_size);
    EXPECT_EQ(sig.member_count, sig.members.size());
    for (std::size_t slot = 0; slot < sig.numeric_stats.size(); ++slot) {
      std::vector<double> xs;
      for (const auto& m : sig.members) xs.push_back(bundle.vector(m)->numeric[slot]);
      const double med = median_of(xs);
      std::vector<double> dev;
      for (double x : xs) dev.push_back(std::fabs(x - med));
      long double sum = 0;
      for (double x : xs) sum += x;
      const double mean = static_cast<double>(sum / xs.size());
      long double ss = 0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      const auto& s = sig.numeric_stats[slot];
      EXPECT_EQ(s.median, med);
      EXPECT_EQ(s.mad, median_of(dev));
      EXPECT_NEAR(s.mean, mean, 1e-9 * std::max(1.0, std::fabs(mean)));
      EXPECT_NEAR(s.stddev, std::sqrt(static_cast<double>(ss / xs.size())), 1e-9 * std::max(1.0, std::fabs(mean)));
      EXPECT_GE(s.mad, 0.0);
      EXPECT_GE(s.stddev, 0.0);
    }
    for (const auto& counts : sig.categorical_stats) {
      std::size_t sum = 0;
      for (const auto& [v, n] : counts) sum += n;
      EXPECT_EQ(sum, sig.member_count);
    }
    for (const auto& m : sig.members) EXPECT_EQ(set.assignment.at(m), sig.id);
    assigned += sig.members.size();
  }
  std::size_t unclustered = 0;
  for (const auto& [id, s] : set.assignment) unclustered += s == kUnclustered;
  EXPECT_EQ(assigned + unclustered, bundle.vectors.size());
  EXPECT_EQ(set.assignment.size(), bundle.vectors.size());
}

// Members keep the template they were mined under, even on a noisy corpus.
TEST(Invariants, MembersShareSignatureTemplate) {
  auto spec = testing_support::small_spec(23, 40);
  const auto corpus = generate_corpus(spec);
  const auto bundle = testing_support::bundle_of(corpus);
  const auto set = mine_signatures(bundle.view(), {});
  ASSERT_FALSE(set.signatures.empty());
  for (const auto& sig : set.signatures) {
    const auto slot = static_cast<std::size_t>(feature_schema(sig.kind).slot("name_template_class"));
    for (const auto& m : sig.members) {
      EXPECT_EQ(bundle.tokens.token(bundle.vector(m)->categorical.at(slot)), sig.name_template) << m;
    }
  }
}

TEST(Invariants, DeterministicGivenSeed) {
  const auto corpus = generate_corpus(testing_support::small_spec(22, 20));
  const auto bundle = testing_support::bundle_of(corpus);
  MiningParams p;
  p.seed = 99;
  EXPECT_EQ(mine_signatures(bundle.view(), p), mine_signatures(bundle.view(), p));
}

TEST(SignatureReport, EmptyAndSorted) {
  EXPECT_TRUE(signature_report(SignatureSet{}).empty());
  std::vector<std::pair<std::string, int>> acls;
  for (int i = 1; i <= 3; ++i) acls.emplace_back("ACL_S_" + std::to_string(i), 2);
  for (int i = 1; i <= 6; ++i) acls.emplace_back("ACL_L_" + std::to_string(i), 9);
  const auto set = mine_signatures(acl_bundle(acls).view(), {});
  const auto rows = signature_report(set);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].member_count, 6u);
  EXPECT_EQ(rows[1].member_count, 3u);
  EXPECT_EQ(rows[0].name_template, "ACL_L_#");
  EXPECT_EQ(rows[0].threshold, 3.5);
  EXPECT_EQ(rows[0].whitelist_size, 0u);
}
