#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "netsig/corpus.hpp"
#include "netsig/error.hpp"
#include "netsig/metrics.hpp"
#include "netsig/sankey.hpp"
#include "netsig/serialize.hpp"
#include "netsig/util.hpp"
#include "test_support.hpp"

using namespace netsig;

namespace {

Finding labeled_finding(const std::string& id, PropertyKind kind, ProblemType t, const std::string& feature, bool numeric) {
  Finding f;
  f.property_id = id;
  f.kind = kind;
  f.problem_type = t;
  f.outlier_score = 9;
  f.threshold = 3.5;
  f.violated_signature = "sig";
  f.deviant_features.push_back({feature, numeric, "x", "y", 9});
  return f;
}

}  // namespace

TEST(Metrics, PublishedRowsThatReproduce) {
  struct Row {
    std::uint64_t tp, fp, fn;
    double precision, recall;
  };
  // Rows whose published precision and recall both follow from their counts.
  for (const auto& r : {Row{392, 1031, 240, 0.275, 0.620}, Row{298, 608, 220, 0.329, 0.575},
                        Row{472, 154, 32, 0.754, 0.937}, Row{498, 32, 8, 0.940, 0.984}}) {
    const auto m = metrics_from_counts(r.tp, r.fp, r.fn);
    EXPECT_NEAR(*m.precision().value(), r.precision, 0.001);
    EXPECT_NEAR(*m.recall().value(), r.recall, 0.001);
  }
  // Modified Z-score: recall reproduces, the counts give precision 417/1109.
  const auto m = metrics_from_counts(417, 692, 132);
  EXPECT_NEAR(*m.recall().value(), 0.760, 0.001);
  EXPECT_EQ(m.precision(), (Ratio{417, 1109}));
  EXPECT_NEAR(*m.precision().value(), 0.376, 0.0005);
}

TEST(Metrics, UndefinedMarkers) {
  const auto m = metrics_from_counts(0, 0, 0);
  EXPECT_FALSE(m.precision().defined());
  EXPECT_FALSE(m.recall().value().has_value());
  EXPECT_EQ(format_ratio(m.precision()), "undefined");
  EXPECT_EQ(compute_metrics({}, GroundTruth{}).tp, 0u);
}

TEST(Metrics, RationalComparisons) {
  EXPECT_TRUE((Ratio{1, 3}) == (Ratio{2, 6}));
  EXPECT_TRUE((Ratio{2, 3}) > (Ratio{3, 5}));
  EXPECT_TRUE((Ratio{1, 2}) >= (Ratio{1, 2}));
  EXPECT_TRUE((Ratio{0, 1}) > (Ratio{0, 0}));
  EXPECT_FALSE((Ratio{0, 0}) > (Ratio{0, 0}));
  EXPECT_TRUE((Ratio{~0ull, ~0ull}) == (Ratio{1, 1}));
}

TEST(Metrics, IdentitiesOnRandomInputs) {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    GroundTruth truth;
    std::vector<Finding> findings;
    std::uint64_t buggy = 0;
    const auto n = rng.uniform_int(1, 80);
    for (int i = 0; i < n; ++i) {
      const std::string id = "p" + std::to_string(i);
      TruthLabel l;
      l.buggy = rng.bernoulli(0.3);
      buggy += l.buggy;
      truth.labels[id] = l;
      if (rng.bernoulli(0.4)) findings.push_back(labeled_finding(id, PropertyKind::Acl, ProblemType::Unknown, "f", true));
    }
    if (rng.bernoulli(0.5)) findings.push_back(labeled_finding("unlabeled", PropertyKind::Acl, ProblemType::Unknown, "f", true));
    const auto m = compute_metrics(findings, truth);
    EXPECT_EQ(m.tp + m.fn, buggy);
    EXPECT_EQ(m.emitted_findings, findings.size());
    EXPECT_EQ(m.labeled_findings, m.tp + m.fp);
    if (m.precision().defined()) {
      // precision * (TP + FP) = TP as a rational identity.
      EXPECT_EQ(m.precision().num, m.tp);
      EXPECT_EQ(m.precision().den, m.tp + m.fp);
      EXPECT_GE(*m.precision().value(), 0.0);
      EXPECT_LE(*m.precision().value(), 1.0);
    }
  }
}

TEST(GenerateCorpus, ZeroRatesAllClean) {
  auto spec = testing_support::small_spec(2, 10);
  for (auto& [t, r] : spec.bug_injection) r = 0;
  const auto c = generate_corpus(spec);
  EXPECT_EQ(c.truth.buggy_count(), 0u);
  for (const auto& [id, l] : c.truth.labels) EXPECT_FALSE(l.buggy);
}

TEST(GenerateCorpus, DefaultScaleAndDeterminism) {
  CorpusSpec spec;
  const auto a = generate_corpus(spec);
  const auto b = generate_corpus(spec);
  EXPECT_EQ(a.device_texts, b.device_texts);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.snapshot.snapshot_id, b.snapshot.snapshot_id);
  EXPECT_EQ(a.truth.labels.size(), 6000u);
  EXPECT_EQ(a.snapshot.devices.size(), 150u);
  spec.seed += 1;
  EXPECT_NE(generate_corpus(spec).device_texts, a.device_texts);
}

TEST(GenerateCorpus, TruthConsistentWithCorpus) {
  const auto c = generate_corpus(testing_support::small_spec(17, 40));
  std::map<ProblemType, std::size_t> tally;
  std::set<std::string> ids;
  for (const auto& p : extract_properties(c.snapshot)) ids.insert(p.id);
  for (const auto& [id, l] : c.truth.labels) {
    EXPECT_TRUE(ids.count(id)) << id;
    if (l.buggy) tally[l.problem_type]++;
  }
  EXPECT_EQ(ids.size(), c.truth.labels.size());
  for (const auto& [t, n] : c.truth.injected_count) EXPECT_EQ(tally[t], n) << to_string(t);
  EXPECT_EQ(c.truth.injected_dangling.size(), c.truth.injected_count.at(ProblemType::UndefinedReference));
}

TEST(GenerateCorpus, InfeasibleSpecs) {
  auto code_of = [](const CorpusSpec& s) {
    try {
      s.validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ParseError;
  };
  CorpusSpec s;
  s.template_count[PropertyKind::Acl] = 50;
  EXPECT_EQ(code_of(s), ErrorCode::InfeasibleSpec);
  s = {};
  s.node_count = 0;
  EXPECT_EQ(code_of(s), ErrorCode::InfeasibleSpec);
  s = {};
  s.bug_injection[ProblemType::ShadowedRule] = 1.5;
  EXPECT_EQ(code_of(s), ErrorCode::InfeasibleSpec);
  EXPECT_THROW(generate_corpus(s), Error);
}

TEST(CompareDetectors, NeedsTwoRunsAndMarksFailures) {
  const auto c = generate_corpus(testing_support::small_spec(5, 20));
  const auto bundle = testing_support::bundle_of(c);
  auto runs = default_detector_runs();
  EXPECT_THROW(compare_detectors(bundle, c.truth, {runs[0]}), Error);
  auto broken = runs[0];
  broken.name = "broken";
  broken.config.zscore_threshold = -1;
  const auto rows = compare_detectors(bundle, c.truth, {runs[0], broken});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].metrics.has_value());
  EXPECT_FALSE(rows[1].metrics.has_value());
  EXPECT_FALSE(rows[1].error.empty());
  const auto text = render_comparison_text(rows);
  EXPECT_NE(text.find("broken"), std::string::npos);
  EXPECT_NE(text.find("failed"), std::string::npos);
}

TEST(CompareDetectors, CleanCorpusRowsAreZero) {
  auto spec = testing_support::small_spec(8, 10);
  for (auto& [t, r] : spec.bug_injection) r = 0;
  spec.benign_variation_rate = 0;
  const auto c = generate_corpus(spec);
  const auto bundle = testing_support::bundle_of(c);
  const auto runs = default_detector_runs();
  const auto rows = compare_detectors(bundle, c.truth, {runs[3], runs[4]});
  for (const auto& r : rows) {
    ASSERT_TRUE(r.metrics);
    EXPECT_EQ(r.metrics->tp, 0u);
    EXPECT_EQ(r.metrics->fn, 0u);
  }
  EXPECT_EQ(rows[1].metrics->fp, 0u);
}

TEST(CompareDetectors, FiveRowsWithOrdering) {
  const auto c = generate_corpus(CorpusSpec{});
  const auto bundle = testing_support::bundle_of(c);
  const auto rows = compare_detectors(bundle, c.truth, default_detector_runs());
  ASSERT_EQ(rows.size(), 5u);
  const std::vector<std::string> names{"zscore", "modified_zscore", "gmm", "signature", "signature+retune"};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i].name, names[i]);
    ASSERT_TRUE(rows[i].metrics) << rows[i].error;
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(rows[3].metrics->precision() > rows[i].metrics->precision());
  EXPECT_TRUE(rows[4].metrics->precision() > rows[3].metrics->precision());
  EXPECT_GE(*rows[3].metrics->recall().value(), 0.9);
}

TEST(Sankey, EmptyAndSingleFlow) {
  const auto empty = build_sankey({});
  EXPECT_TRUE(empty.nodes.empty());
  EXPECT_TRUE(empty.links.empty());
  std::vector<Finding> fs;
  for (int i = 0; i < 10; ++i) {
    fs.push_back(labeled_finding("p" + std::to_string(i), PropertyKind::Acl, ProblemType::UndefinedReference,
                                 "action_sequence_hash_other", false));
  }
  const auto flow = build_sankey(fs);
  ASSERT_EQ(flow.nodes.size(), 3u);
  ASSERT_EQ(flow.links.size(), 2u);
  EXPECT_EQ(flow.nodes[0].name, "acl");
  EXPECT_EQ(flow.nodes[1].name, "categorical-deviation");
  EXPECT_EQ(flow.nodes[2].name, "UndefinedReference");
  for (const auto& l : flow.links) EXPECT_EQ(l.value, 10u);
}

TEST(Sankey, DeviationCategories) {
  EXPECT_EQ(deviation_category(labeled_finding("a", PropertyKind::Acl, ProblemType::Unknown, "action_sequence_hash", false)),
            "order-anomaly");
  EXPECT_EQ(deviation_category(labeled_finding("a", PropertyKind::RouteFilter, ProblemType::Unknown, "length_range_profile", false)),
            "order-anomaly");
  EXPECT_EQ(deviation_category(labeled_finding("a", PropertyKind::Vrf, ProblemType::Unknown, "policy_reference_template", false)),
            "missing-reference");
  EXPECT_EQ(deviation_category(labeled_finding("a", PropertyKind::Vrf, ProblemType::Unknown, "rd_template", false)),
            "categorical-deviation");
  EXPECT_EQ(deviation_category(labeled_finding("a", PropertyKind::Acl, ProblemType::Unknown, "entry_count", true)),
            "numeric-deviation");
}

TEST(Sankey, GroupByOracleAndConservation) {
  const auto c = generate_corpus(testing_support::small_spec(23, 40));
  const auto bundle = testing_support::bundle_of(c);
  const auto findings = detect_signature_outliers(bundle, mine_signatures(bundle.view(), {}));
  const auto flow = build_sankey(findings);

  // Independent tally from the serialized JSON lines.
  std::map<std::string, std::size_t> kinds, categories, problems;
  std::map<std::pair<std::string, std::string>, std::size_t> links;
  std::istringstream in(findings_jsonl(findings, {}));
  std::size_t total = 0;
  for (std::string line; std::getline(in, line); ++total) {
    const auto j = nlohmann::json::parse(line);
    const auto kind = j["kind"].get<std::string>();
    const auto problem = j["problem_type"].get<std::string>();
    std::string category = "numeric-deviation";
    double best = -1;
    for (const auto& d : j["deviant_features"]) {
      if (d["deviation"].get<double>() <= best) continue;
      best = d["deviation"].get<double>();
      const auto name = d["feature"].get<std::string>();
      if (name == "action_sequence_hash" || name == "length_range_profile") {
        category = "order-anomaly";
      } else if (name.find("reference") != std::string::npos) {
        category = "missing-reference";
      } else {
        category = d["numeric"].get<bool>() ? "numeric-deviation" : "categorical-deviation";
      }
    }
    kinds[kind]++;
    categories[category]++;
    problems[problem]++;
    links[{kind, category}]++;
    links[{category, problem}]++;
  }
  std::map<std::pair<std::string, std::string>, std::size_t> got;
  for (const auto& l : flow.links) got[{flow.nodes[l.source].name, flow.nodes[l.target].name}] += l.value;
  EXPECT_EQ(got, links);
  EXPECT_EQ(flow.layer_total(0), total);
  EXPECT_EQ(flow.layer_total(1), total);
  EXPECT_EQ(flow.layer_total(2), total);
  // Per middle node, inflow equals outflow.
  for (std::size_t n = 0; n < flow.nodes.size(); ++n) {
    if (flow.nodes[n].layer != 1) continue;
    std::size_t in_w = 0, out_w = 0;
    for (const auto& l : flow.links) {
      if (l.target == n) in_w += l.value;
      if (l.source == n) out_w += l.value;
    }
    EXPECT_EQ(in_w, out_w) << flow.nodes[n].name;
    EXPECT_EQ(in_w, categories[flow.nodes[n].name]);
  }
}
