#include "cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fmt/format.h>

#include "netsig/error.hpp"
#include "service.hpp"
#include "session.hpp"

namespace netsig::app {

namespace fs = std::filesystem;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

void print_diagnostics(const std::vector<Diagnostic>& diags, std::ostream& err) {
  for (const auto& d : diags) err << d.format() << "\n";
}

std::vector<DetectorRun> parse_detector_list(const std::string& spec, std::uint64_t seed) {
  const auto all = default_detector_runs(seed);
  if (spec == "all") return all;
  std::vector<DetectorRun> out;
  std::string item;
  std::istringstream in(spec);
  while (std::getline(in, item, ',')) {
    if (item == "modz") item = "modified_zscore";
    auto it = std::find_if(all.begin(), all.end(), [&](const DetectorRun& r) { return r.name == item; });
    if (it == all.end()) throw CLI::ValidationError("--detectors", "unknown detector '" + item + "'");
    out.push_back(*it);
  }
  return out;
}

struct Options {
  // analyze
  std::string snapshot;
  std::string detector = "signature";
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string weights_file;
  std::string truth_file;
  double merge_distance = MiningParams{}.merge_distance;
  double threshold = MiningParams{}.default_threshold;
  // generate
  std::string spec_file;
  std::optional<std::uint64_t> generate_seed;
  // eval
  std::string detectors = "all";
  std::string json_out;
  bool eval_sankey = false;
  // retune / report / serve
  std::string log_file;
  std::string state_dir;
  bool sankey = false;
  std::string rank = "severity";
  std::size_t limit = 20;
  bool json = false;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string static_dir;
};

fs::path state_dir_or_default(const std::string& given) {
  return given.empty() ? default_state_dir() : fs::path(given);
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  auto method = method_from_string(o.detector);
  if (!method) throw CLI::ValidationError("--detector", "unknown detector '" + o.detector + "'");
  AnalyzeOptions opts;
  opts.detector.method = *method;
  opts.detector.seed = o.seed;
  opts.mining.seed = o.seed;
  opts.mining.merge_distance = o.merge_distance;
  opts.mining.default_threshold = o.threshold;
  if (!o.weights_file.empty()) opts.weights = load_severity_weights(o.weights_file);
  auto state = analyze(o.snapshot, opts);
  print_diagnostics(state.bundle->snapshot.ingest_warnings, err);
  print_diagnostics(validate_snapshot(state.bundle->snapshot), err);
  print_diagnostics(state.base.diagnostics, err);
  const auto dir = state_dir_or_default(o.out_dir);
  fs::create_directories(dir);
  if (!o.truth_file.empty()) {
    const auto text = read_file(o.truth_file);
    state.truth = ground_truth_from_json(parse_json(text, o.truth_file));
    write_file_atomic(dir / kTruthFile, text);
  }
  persist(state, dir);
  out << fmt::format("{} properties, {} signatures, {} findings ({}) -> {}\n", state.bundle->properties.size(),
                     state.current.signatures.size(), state.findings.size(), to_string(opts.detector.method),
                     dir.string());
  return kExitOk;
}

int cmd_generate(const Options& o, std::ostream& out) {
  CorpusSpec spec;
  if (!o.spec_file.empty()) spec = corpus_spec_from_json(read_json_file(o.spec_file));
  if (o.generate_seed) spec.seed = *o.generate_seed;
  const auto corpus = generate_corpus(spec);
  write_corpus(corpus, spec, o.out_dir);
  write_file_atomic(fs::path(o.out_dir) / "corpus.spec.json", dump(to_json(spec)));
  out << fmt::format("{} devices, {} properties, {} injected bugs -> {}\n", corpus.device_texts.size(),
                     corpus.truth.labels.size(), corpus.truth.buggy_count(), o.out_dir);
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const auto runs = parse_detector_list(o.detectors, o.seed);
  const auto bundle = build_bundle(load_snapshot(o.snapshot));
  print_diagnostics(bundle.snapshot.ingest_warnings, err);
  const auto truth = ground_truth_from_json(read_json_file(o.truth_file));
  MiningParams mining;
  mining.seed = o.seed;
  std::vector<ComparisonRow> rows;
  if (runs.size() >= 2) {
    rows = compare_detectors(bundle, truth, runs, mining);
  } else {
    // A single detector is evaluated directly; the comparison needs two.
    auto both = runs;
    both.push_back(runs.front());
    rows = compare_detectors(bundle, truth, both, mining);
    rows.pop_back();
  }
  out << render_comparison_text(rows);
  Json doc = to_json(rows);
  if (o.eval_sankey) {
    const auto set = mine_signatures(bundle.view(), mining);
    std::vector<Finding> labeled;
    for (auto& f : detect_signature_outliers(bundle, set)) {
      if (truth.labels.count(f.property_id)) labeled.push_back(std::move(f));
    }
    doc["sankey"] = to_json(build_sankey(labeled));
  }
  if (!o.json_out.empty()) write_file_atomic(o.json_out, dump(doc));
  const bool failed = std::any_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return !r.metrics; });
  return failed ? kExitAnalysisError : kExitOk;
}

int cmd_retune_apply(const Options& o, std::ostream& out) {
  const auto dir = state_dir_or_default(o.state_dir);
  const auto state = load_state(dir);
  const auto log = parse_retune_log(read_file(o.log_file));
  const auto next = replay_log(state, log);
  persist(next, dir);
  out << fmt::format("replayed {} actions: generation {} -> {}, {} findings\n", log.actions.size(),
                     next.base.generation, next.generation(), next.findings.size());
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  const auto state = load_state(state_dir_or_default(o.state_dir));
  if (o.sankey) {
    out << dump(to_json(state.sankey()));
    return kExitOk;
  }
  const auto mode = o.rank == "outlier" ? RankMode::Outlier : RankMode::Severity;
  const auto ranked = state.ranked(mode);
  if (o.json) {
    for (std::size_t i = 0; i < ranked.size() && i < o.limit; ++i) out << to_json(ranked[i]).dump() << "\n";
    return kExitOk;
  }
  out << fmt::format("generation {}, {} findings, ranked by {}\n", state.generation(), ranked.size(), to_string(mode));
  out << fmt::format("{:>5}  {:>9}  {:>8}  {:>6}  {:<26}  {}\n", "rank", "severity", "outlier", "blast", "problem",
                     "property");
  for (std::size_t i = 0; i < ranked.size() && i < o.limit; ++i) {
    const auto& f = ranked[i];
    out << fmt::format("{:>5}  {:>9.3f}  {:>8.3f}  {:>6}  {:<26}  {}\n", *f.rank, f.severity.value_or(0),
                       f.outlier_score, f.blast_radius.value_or(0), to_string(f.problem_type), f.property_id);
  }
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  const auto dir = state_dir_or_default(o.state_dir);
  auto state = load_state(dir);
  if (!o.truth_file.empty()) state.truth = ground_truth_from_json(read_json_file(o.truth_file));
  Service service(std::move(state), dir);
  httplib::Server server;
  std::optional<fs::path> assets;
  if (!o.static_dir.empty()) assets = o.static_dir;
  service.mount(server, assets);
  if (!server.bind_to_port(o.host, o.port)) {
    throw Error(ErrorCode::IoError, fmt::format("cannot bind {}:{}", o.host, o.port));
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  out << fmt::format("serving {} on http://{}:{}\n", dir.string(), o.host, o.port) << std::flush;
  server.listen_after_bind();
  g_server = nullptr;
  return kExitOk;
}

int cmd_properties_dump(const Options& o, std::ostream& out) {
  const auto snapshot = load_snapshot(o.snapshot);
  for (const auto& p : extract_properties(snapshot)) out << to_json(p).dump() << "\n";
  return kExitOk;
}

int cmd_encode_dump(const Options& o, std::ostream& out) {
  const auto bundle = build_bundle(load_snapshot(o.snapshot));
  for (const auto& v : bundle.vectors) out << to_json(v, bundle.tokens).dump() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signature-based outlier detection for network configurations", "netsig"};
  app.require_subcommand(1);
  Options o;

  auto* analyze_cmd = app.add_subcommand("analyze", "Mine signatures and write findings for a snapshot directory");
  analyze_cmd->add_option("snapshot", o.snapshot, "Directory of *.cfg / *.json device configs")->required();
  analyze_cmd->add_option("--detector", o.detector, "signature, zscore, modified_zscore or gmm");
  analyze_cmd->add_option("--out", o.out_dir, "State directory (default $NETSIG_STATE_DIR or ./netsig-state)");
  analyze_cmd->add_option("--seed", o.seed, "Seed for stochastic steps");
  analyze_cmd->add_option("--weights", o.weights_file, "Severity weights (key = value)");
  analyze_cmd->add_option("--truth", o.truth_file, "Ground truth to copy into the state for metrics");
  analyze_cmd->add_option("--merge-distance", o.merge_distance, "Agglomerative merge distance");
  analyze_cmd->add_option("--threshold", o.threshold, "Default per-signature threshold");

  auto* generate_cmd = app.add_subcommand("generate", "Generate a labeled synthetic corpus");
  generate_cmd->add_option("--spec", o.spec_file, "corpus.spec.json (defaults when omitted)");
  generate_cmd->add_option("--out", o.out_dir, "Output directory")->required();
  generate_cmd->add_option("--seed", o.generate_seed, "Override the spec's seed");

  auto* eval_cmd = app.add_subcommand("eval", "Compare detectors against ground truth");
  eval_cmd->add_option("--snapshot", o.snapshot, "Snapshot directory")->required();
  eval_cmd->add_option("--truth", o.truth_file, "truth.json")->required();
  eval_cmd->add_option("--detectors", o.detectors, "all, or a comma list of detector names");
  eval_cmd->add_option("--json", o.json_out, "Write the comparison table as JSON");
  eval_cmd->add_flag("--sankey", o.eval_sankey, "Include the Sankey flow of signature findings in --json");
  eval_cmd->add_option("--seed", o.seed, "Seed for stochastic steps");

  auto* retune_cmd = app.add_subcommand("retune", "Retuning operations");
  retune_cmd->require_subcommand(1);
  auto* apply_cmd = retune_cmd->add_subcommand("apply", "Replay a retune log onto a state directory");
  apply_cmd->add_option("--log", o.log_file, "retune.jsonl")->required();
  apply_cmd->add_option("--state", o.state_dir, "State directory");

  auto* report_cmd = app.add_subcommand("report", "Print ranked findings or the Sankey flow");
  report_cmd->add_option("--state", o.state_dir, "State directory");
  report_cmd->add_flag("--sankey", o.sankey, "Emit the Sankey flow as JSON");
  report_cmd->add_option("--rank", o.rank, "severity or outlier")->check(CLI::IsMember({"severity", "outlier"}));
  report_cmd->add_option("--limit", o.limit, "Number of findings to print");
  report_cmd->add_flag("--json", o.json, "Emit findings as JSON lines");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API for a state directory");
  serve_cmd->add_option("--port", o.port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", o.host, "Bind address");
  serve_cmd->add_option("--state", o.state_dir, "State directory");
  serve_cmd->add_option("--truth", o.truth_file, "Ground truth for /api/metrics");
  serve_cmd->add_option("--static", o.static_dir, "Directory of built UI assets");

  auto* properties_cmd = app.add_subcommand("properties", "Property extraction");
  properties_cmd->require_subcommand(1);
  auto* pdump = properties_cmd->add_subcommand("dump", "Print properties as JSON lines");
  pdump->add_option("snapshot", o.snapshot, "Snapshot directory")->required();

  auto* encode_cmd = app.add_subcommand("encode", "Feature encoding");
  encode_cmd->require_subcommand(1);
  auto* edump = encode_cmd->add_subcommand("dump", "Print feature vectors as JSON lines");
  edump->add_option("snapshot", o.snapshot, "Snapshot directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(o, out, err);
    if (*generate_cmd) return cmd_generate(o, out);
    if (*eval_cmd) return cmd_eval(o, out, err);
    if (*apply_cmd) return cmd_retune_apply(o, out);
    if (*report_cmd) return cmd_report(o, out);
    if (*serve_cmd) return cmd_serve(o, out);
    if (*pdump) return cmd_properties_dump(o, out);
    if (*edump) return cmd_encode_dump(o, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "ERROR " << e.what() << "\n";
    return kExitAnalysisError;
  } catch (const std::exception& e) {
    err << "ERROR " << e.what() << "\n";
    return kExitAnalysisError;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace netsig::app
