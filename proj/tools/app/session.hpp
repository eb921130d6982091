#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netsig/detectors.hpp"
#include "netsig/metrics.hpp"
#include "netsig/pipeline.hpp"
#include "netsig/retune.hpp"
#include "netsig/sankey.hpp"
#include "netsig/serialize.hpp"
#include "netsig/severity.hpp"

namespace netsig::app {

// Files inside a state directory.
inline constexpr const char* kSignaturesFile = "signatures.json";
inline constexpr const char* kBaseSignaturesFile = "signatures.base.json";
inline constexpr const char* kFindingsFile = "findings.jsonl";
inline constexpr const char* kRetuneLogFile = "retune.jsonl";
inline constexpr const char* kManifestFile = "run-manifest.json";
inline constexpr const char* kTruthFile = "truth.json";
inline constexpr const char* kStateDirEnv = "NETSIG_STATE_DIR";

struct AnalyzeOptions {
  DetectorConfig detector;
  MiningParams mining;
  SeverityWeights weights;
  std::optional<std::filesystem::path> weights_file;
};

// One immutable generation of analysis state. Retuning produces a new State.
struct State {
  std::shared_ptr<const CorpusBundle> bundle;
  std::string snapshot_dir;
  AnalyzeOptions options;
  SignatureSet base;      // generation the retune log starts from
  SignatureSet current;
  RetuneLog log;
  std::vector<Finding> findings;  // property-id order, severity filled
  std::optional<GroundTruth> truth;

  std::uint64_t generation() const { return current.generation; }
  // Findings whose property carries a truth label; all findings when no truth is loaded.
  std::vector<Finding> labeled_findings() const;
  std::vector<Finding> ranked(RankMode mode) const;
  std::optional<EvalMetrics> metrics() const;
  SankeyFlow sankey() const;
};

// Runs the full pipeline on a snapshot directory.
State analyze(const std::filesystem::path& snapshot_dir, const AnalyzeOptions& options);

// Findings for `set` under the state's detector and severity settings.
std::vector<Finding> findings_for(const CorpusBundle& bundle, const SignatureSet& set, const AnalyzeOptions& options);

// Applies one action on top of `state`; the input is untouched.
State apply_action(const State& state, const RetuneAction& action);

// Replays `log` from the state's base set.
State replay_log(const State& state, const RetuneLog& log);

Json run_manifest(const State& state);

// Writes signatures.base.json, signatures.json, findings.jsonl, retune.jsonl and run-manifest.json.
void persist(const State& state, const std::filesystem::path& dir);

// Rebuilds a state from a directory written by persist(); truth.json is loaded when present.
State load_state(const std::filesystem::path& dir);

std::filesystem::path default_state_dir();

}  // namespace netsig::app
