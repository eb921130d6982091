#include "session.hpp"

#include <cstdlib>
#include <set>

#include "netsig/error.hpp"

namespace netsig::app {

namespace fs = std::filesystem;

std::vector<Finding> State::labeled_findings() const {
  if (!truth) return findings;
  std::vector<Finding> out;
  for (const auto& f : findings) {
    if (truth->labels.count(f.property_id)) out.push_back(f);
  }
  return out;
}

std::vector<Finding> State::ranked(RankMode mode) const { return rank(findings, mode, options.weights); }

std::optional<EvalMetrics> State::metrics() const {
  if (!truth) return std::nullopt;
  return compute_metrics(findings, *truth);
}

SankeyFlow State::sankey() const { return build_sankey(labeled_findings()); }

std::vector<Finding> findings_for(const CorpusBundle& bundle, const SignatureSet& set, const AnalyzeOptions& options) {
  auto findings = options.detector.method == Method::Signature ? detect_signature_outliers(bundle, set)
                                                                : run_detector(options.detector, bundle);
  apply_severity(findings, bundle.graph, options.weights);
  return findings;
}

State analyze(const fs::path& snapshot_dir, const AnalyzeOptions& options) {
  options.detector.validate();
  options.weights.validate();
  State s;
  s.options = options;
  // Absolute, so the state directory can be reopened from any working directory.
  s.snapshot_dir = fs::absolute(snapshot_dir).lexically_normal().string();
  s.bundle = std::make_shared<const CorpusBundle>(build_bundle(load_snapshot(snapshot_dir)));
  s.base = mine_signatures(s.bundle->view(), options.mining);
  s.current = s.base;
  s.log.base_generation = s.base.generation;
  s.findings = findings_for(*s.bundle, s.current, options);
  return s;
}

State apply_action(const State& state, const RetuneAction& action) {
  State next = state;
  next.current = apply_retune(state.current, action, state.bundle->view());
  next.log.actions.push_back(action);
  next.findings = findings_for(*next.bundle, next.current, next.options);
  return next;
}

State replay_log(const State& state, const RetuneLog& log) {
  State next = state;
  next.current = replay(log, state.base, state.bundle->view());
  next.log = log;
  next.findings = findings_for(*next.bundle, next.current, next.options);
  return next;
}

Json run_manifest(const State& s) {
  std::set<std::string> violated;
  for (const auto& f : s.findings) {
    if (f.violated_signature) violated.insert(*f.violated_signature);
  }
  return Json{{"tool", "netsig"},
              {"schema_version", kSchemaVersion},
              {"snapshot_dir", s.snapshot_dir},
              {"snapshot_id", s.bundle->snapshot.snapshot_id},
              {"device_count", s.bundle->snapshot.devices.size()},
              {"property_count", s.bundle->properties.size()},
              {"detector", to_json(s.options.detector)},
              {"seed", s.options.detector.seed},
              {"mining", to_json(s.options.mining)},
              {"severity", to_json(s.options.weights)},
              {"base_generation", s.base.generation},
              {"generation", s.current.generation},
              {"retune_actions", s.log.actions.size()},
              {"signature_count", s.current.signatures.size()},
              {"violated_signature_count", violated.size()},
              {"finding_count", s.findings.size()},
              {"outputs", {kSignaturesFile, kBaseSignaturesFile, kFindingsFile, kRetuneLogFile, kManifestFile}}};
}

void persist(const State& s, const fs::path& dir) {
  fs::create_directories(dir);
  write_file_atomic(dir / kBaseSignaturesFile, dump(to_json(s.base)));
  write_file_atomic(dir / kSignaturesFile, dump(to_json(s.current)));
  write_file_atomic(dir / kFindingsFile, findings_jsonl(s.findings, s.options.detector));
  write_file_atomic(dir / kRetuneLogFile, retune_log_jsonl(s.log));
  write_file_atomic(dir / kManifestFile, dump(run_manifest(s)));
}

State load_state(const fs::path& dir) {
  const auto manifest = read_json_file(dir / kManifestFile);
  if (!manifest.contains("snapshot_dir") || !manifest.contains("detector")) {
    throw Error(ErrorCode::ParseError, (dir / kManifestFile).string() + ": not a run manifest");
  }
  State s;
  s.snapshot_dir = manifest.at("snapshot_dir").get<std::string>();
  s.options.detector = detector_config_from_json(manifest.at("detector"));
  s.options.mining = mining_params_from_json(manifest.at("mining"));
  const auto& sev = manifest.at("severity");
  s.options.weights.alpha = sev.at("alpha").get<double>();
  s.options.weights.beta = sev.at("beta").get<double>();
  for (const auto& [name, w] : sev.at("problem_type_weight").items()) {
    auto t = problem_type_from_string(name);
    if (!t) throw Error(ErrorCode::ParseError, "unknown problem type in manifest: " + name);
    s.options.weights.problem_type_weight[*t] = w.get<double>();
  }
  s.bundle = std::make_shared<const CorpusBundle>(build_bundle(load_snapshot(s.snapshot_dir)));
  if (manifest.value("snapshot_id", std::string()) != s.bundle->snapshot.snapshot_id) {
    throw Error(ErrorCode::SchemaMismatch, "snapshot at " + s.snapshot_dir + " changed since the state was written");
  }
  s.base = signature_set_from_json(read_json_file(dir / kBaseSignaturesFile));
  s.log = parse_retune_log(read_file(dir / kRetuneLogFile));
  s.current = replay(s.log, s.base, s.bundle->view());
  s.findings = findings_for(*s.bundle, s.current, s.options);
  if (fs::exists(dir / kTruthFile)) s.truth = ground_truth_from_json(read_json_file(dir / kTruthFile));
  return s;
}

fs::path default_state_dir() {
  const char* env = std::getenv(kStateDirEnv);
  return env && *env ? fs::path(env) : fs::path("netsig-state");
}

}  // namespace netsig::app
