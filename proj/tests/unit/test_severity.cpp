#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "netsig/corpus.hpp"
#include "netsig/error.hpp"
#include "netsig/pipeline.hpp"
#include "netsig/serialize.hpp"
#include "netsig/severity.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace netsig;

namespace {

Finding finding(std::string id, double score, ProblemType t, double threshold = 1.0) {
  Finding f;
  f.property_id = std::move(id);
  f.outlier_score = score;
  f.threshold = threshold;
  f.problem_type = t;
  return f;
}

std::vector<std::string> order(const std::vector<Finding>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(f.property_id);
  return out;
}

SeverityWeights unit_weights() {
  SeverityWeights w;
  for (auto& [t, v] : w.problem_type_weight) v = 1.0;
  w.alpha = 0;
  return w;
}

struct Heterogeneous {
  GeneratedCorpus corpus;
  CorpusBundle bundle;
  std::vector<Finding> findings;
};

const Heterogeneous& heterogeneous() {
  static const Heterogeneous h = [] {
    Heterogeneous x{generate_corpus(testing_support::small_spec(31, 40)), {}, {}};
    x.bundle = testing_support::bundle_of(x.corpus);
    x.findings = detect_signature_outliers(x.bundle, mine_signatures(x.bundle.view(), {}));
    return x;
  }();
  return h;
}

}  // namespace

TEST(ComputeSeverity, UnitCase) {
  const auto g = make_reference_graph({"p"}, {});
  SeverityWeights w;
  w.problem_type_weight[ProblemType::DeviantAttributeValue] = 1.0;
  EXPECT_DOUBLE_EQ(compute_severity(finding("p", 3.5, ProblemType::DeviantAttributeValue, 3.5), g, w), 1.0);
}

TEST(ComputeSeverity, DoublingAlpha) {
  std::vector<std::string> nodes{"p"};
  std::vector<RefEdge> edges;
  for (int i = 0; i < 10; ++i) {
    nodes.push_back("d" + std::to_string(i));
    edges.push_back({nodes.back(), "p", {}});
  }
  const auto g = make_reference_graph(nodes, edges);
  const auto f = finding("p", 7, ProblemType::ShadowedRule, 3.5);
  SeverityWeights w;
  w.alpha = 0.3;
  const double s1 = compute_severity(f, g, w);
  w.alpha = 0.6;
  const double s2 = compute_severity(f, g, w);
  EXPECT_NEAR(s2 / s1, (1 + 2 * 0.3 * 10) / (1 + 0.3 * 10), 1e-12);
  EXPECT_THROW(compute_severity(finding("zz", 1, ProblemType::Unknown), g, w), Error);
}

TEST(ComputeSeverity, RecomputedFromSerializedFindings) {
  const auto& h = heterogeneous();
  auto findings = h.findings;
  SeverityWeights w;
  apply_severity(findings, h.bundle.graph, w);
  const auto text = findings_jsonl(findings, DetectorConfig{});
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    const double weight = w.problem_type_weight.at(*problem_type_from_string(j["problem_type"].get<std::string>()));
    const double expected = w.beta * (j["outlier_score"].get<double>() / j["threshold"].get<double>()) * weight *
                            (1 + w.alpha * j["blast_radius"].get<double>());
    EXPECT_NEAR(j["severity"].get<double>(), expected, 1e-12 * std::max(1.0, expected));
  }
  EXPECT_EQ(n, findings.size());
  EXPECT_GT(n, 0u);
}

TEST(Rank, SingleFinding) {
  std::vector<Finding> fs{finding("a", 4, ProblemType::Unknown)};
  fs[0].severity = 1;
  for (auto mode : {RankMode::Outlier, RankMode::Severity}) {
    const auto r = rank(fs, mode, {});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].rank, 1u);
  }
}

TEST(Rank, TieBreaksAndMissingSeverity) {
  std::vector<Finding> fs{finding("b", 5, ProblemType::DeviantAttributeValue), finding("c", 5, ProblemType::UndefinedReference),
                          finding("a", 5, ProblemType::DeviantAttributeValue), finding("d", 9, ProblemType::Unknown)};
  EXPECT_EQ(order(rank(fs, RankMode::Outlier, {})), (std::vector<std::string>{"d", "c", "a", "b"}));
  try {
    rank(fs, RankMode::Severity, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSeverity);
  }
}

TEST(Rank, UnitWeightsZeroAlphaMatchesOutlierOrder) {
  const auto& h = heterogeneous();
  auto findings = h.findings;
  const auto w = unit_weights();
  apply_severity(findings, h.bundle.graph, w);
  EXPECT_EQ(order(rank(findings, RankMode::Severity, w)), order(rank(findings, RankMode::Outlier, w)));
}

TEST(Rank, DefaultWeightsReorderHeterogeneousCorpus) {
  const auto& h = heterogeneous();
  auto findings = h.findings;
  SeverityWeights w;
  apply_severity(findings, h.bundle.graph, w);
  const auto a = order(rank(findings, RankMode::Outlier, w));
  const auto b = order(rank(findings, RankMode::Severity, w));
  const double tau = kendall_tau(a, b);
  EXPECT_LT(tau, 1.0);
  EXPECT_NEAR(tau, oracle::kendall_tau(a, b), 1e-12);
}

TEST(Rank, PermutationWithDenseRanks) {
  const auto& h = heterogeneous();
  auto findings = h.findings;
  apply_severity(findings, h.bundle.graph, {});
  const auto ranked = rank(findings, RankMode::Severity, {});
  auto a = order(findings), b = order(ranked);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < ranked.size(); ++i) EXPECT_EQ(ranked[i].rank, i + 1);
}

TEST(Rank, ScalingWeightsPreservesOrder) {
  const auto& h = heterogeneous();
  auto f1 = h.findings, f2 = h.findings;
  SeverityWeights w1, w2;
  for (auto& [t, v] : w2.problem_type_weight) v *= 4.0;
  apply_severity(f1, h.bundle.graph, w1);
  apply_severity(f2, h.bundle.graph, w2);
  EXPECT_EQ(order(rank(f1, RankMode::Severity, w1)), order(rank(f2, RankMode::Severity, w2)));
}

TEST(Rank, RaisingOneScoreNeverLowersItsRank) {
  const auto& h = heterogeneous();
  auto findings = h.findings;
  SeverityWeights w;
  apply_severity(findings, h.bundle.graph, w);
  const auto before = rank(findings, RankMode::Severity, w);
  for (std::size_t pick = 0; pick < findings.size(); pick += std::max<std::size_t>(1, findings.size() / 15)) {
    auto bumped = findings;
    bumped[pick].outlier_score *= 2;
    bumped[pick].severity = compute_severity(bumped[pick], h.bundle.graph, w);
    const auto after = rank(bumped, RankMode::Severity, w);
    auto pos = [&](const std::vector<Finding>& fs) {
      return std::find_if(fs.begin(), fs.end(), [&](const Finding& f) { return f.property_id == findings[pick].property_id; })
          ->rank;
    };
    EXPECT_LE(*pos(after), *pos(before));
  }
}

TEST(KendallTau, Basics) {
  EXPECT_EQ(kendall_tau({"a", "b", "c"}, {"a", "b", "c"}), 1.0);
  EXPECT_EQ(kendall_tau({"a", "b", "c"}, {"c", "b", "a"}), -1.0);
  EXPECT_THROW(kendall_tau({"a"}, {"a", "b"}), Error);
}

TEST(Weights, ParseAndValidate) {
  const auto w = parse_severity_weights("# weights\nalpha = 0.5\nbeta=2\nweight.ShadowedRule = 3 # inline\n");
  EXPECT_EQ(w.alpha, 0.5);
  EXPECT_EQ(w.beta, 2.0);
  EXPECT_EQ(w.weight(ProblemType::ShadowedRule), 3.0);
  EXPECT_EQ(w.weight(ProblemType::UndefinedReference), 1.0);
  EXPECT_THROW(parse_severity_weights("alpha = -1\n"), Error);
  EXPECT_THROW(parse_severity_weights("gamma = 1\n"), Error);
  EXPECT_THROW(parse_severity_weights("weight.Bogus = 1\n"), Error);
  EXPECT_THROW(parse_severity_weights("alpha = x\n"), Error);
  EXPECT_THROW(parse_severity_weights("alpha = nan\n"), Error);
}
