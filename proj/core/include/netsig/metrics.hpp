#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netsig/corpus.hpp"
#include "netsig/detectors.hpp"
#include "netsig/pipeline.hpp"
#include "netsig/retune.hpp"
#include "netsig/signatures.hpp"

namespace netsig {

// Exact non-negative rational; den == 0 marks an undefined metric.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 0;

  bool defined() const { return den != 0; }
  std::optional<double> value() const;
  // a/b >= c/d, compared exactly by cross-multiplication. Undefined compares as less than any defined value.
  friend bool operator>=(const Ratio& a, const Ratio& b);
  friend bool operator>(const Ratio& a, const Ratio& b);
  bool operator==(const Ratio& o) const;  // equal as rationals
};

struct EvalMetrics {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t emitted_findings = 0;
  std::uint64_t labeled_findings = 0;  // distinct flagged properties with a truth label

  Ratio precision() const { return {tp, tp + fp}; }
  Ratio recall() const { return {tp, tp + fn}; }
};

EvalMetrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

// TP = flagged and buggy, FP = flagged and clean, FN = buggy and unflagged.
// Findings on properties without a label count toward emitted_findings only.
EvalMetrics compute_metrics(const std::vector<Finding>& findings, const GroundTruth& truth);

struct DetectorRun {
  std::string name;
  DetectorConfig config;
  bool scripted_retune = false;  // only meaningful for Method::Signature
};

// zscore, modified_zscore, gmm, signature, signature+retune.
std::vector<DetectorRun> default_detector_runs(std::uint64_t seed = 0);

struct ComparisonRow {
  std::string name;
  std::optional<EvalMetrics> metrics;
  std::string error;  // set when the detector failed
  std::size_t signature_count = 0;
  std::size_t violated_signature_count = 0;
  std::size_t retune_actions = 0;
};

struct ScriptedSession {
  RetuneLog log;
  std::vector<SignatureSet> generations;  // set after each action, starting with the base set
};

// Suppresses, one action per finding in property-id order, every signature
// finding whose property is labeled clean.
ScriptedSession scripted_retune(const CorpusBundle& bundle, const SignatureSet& base, const GroundTruth& truth,
                                const std::string& author = "scripted");

// Throws Error{InvalidConfig} with fewer than two runs. Per-detector failures
// mark the row instead of aborting.
std::vector<ComparisonRow> compare_detectors(const CorpusBundle& bundle, const GroundTruth& truth,
                                             const std::vector<DetectorRun>& runs,
                                             const MiningParams& params = {});

std::string format_ratio(const Ratio& r, int digits = 3);
std::string render_comparison_text(const std::vector<ComparisonRow>& rows);

}  // namespace netsig
