#pragma once

// JSON forms of every artifact the CLI and service exchange. Key order is
// fixed so identical inputs produce byte-identical files.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "netsig/corpus.hpp"
#include "netsig/detectors.hpp"
#include "netsig/metrics.hpp"
#include "netsig/pipeline.hpp"
#include "netsig/retune.hpp"
#include "netsig/sankey.hpp"
#include "netsig/severity.hpp"
#include "netsig/signatures.hpp"

namespace netsig {

using Json = nlohmann::ordered_json;

inline constexpr int kSignaturesFormatVersion = 1;
inline constexpr int kRetuneLogFormatVersion = 1;

Json to_json(const Diagnostic& d);
Json to_json(const MiningParams& p);
Json to_json(const DetectorConfig& c);
Json to_json(const SeverityWeights& w);
Json to_json(const Finding& f);
Json to_json(const SignatureSet& set);
Json to_json(const SignatureReportRow& row);
Json to_json(const RetuneAction& a);
Json to_json(const CorpusSpec& s);
Json to_json(const GroundTruth& t);
Json to_json(const EvalMetrics& m);
Json to_json(const std::vector<ComparisonRow>& rows);
Json to_json(const SankeyFlow& flow);
Json to_json(const Property& p);
Json to_json(const FeatureVector& v, const TokenTable& tokens);

// Parsers throw Error{ParseError} on malformed documents.
MiningParams mining_params_from_json(const Json& j);
DetectorConfig detector_config_from_json(const Json& j);
Finding finding_from_json(const Json& j);
SignatureSet signature_set_from_json(const Json& j);
RetuneAction retune_action_from_json(const Json& j);
CorpusSpec corpus_spec_from_json(const Json& j);
GroundTruth ground_truth_from_json(const Json& j);

Json parse_json(std::string_view text, std::string_view what);
Json read_json_file(const std::filesystem::path& path);
std::string dump(const Json& j);  // two-space indented, trailing newline

// findings.jsonl: one finding per line, each echoing the detector config.
std::string findings_jsonl(const std::vector<Finding>& findings, const DetectorConfig& config);
std::vector<Finding> parse_findings_jsonl(std::string_view text);

// retune.jsonl: a header line {"retune_log":1,"base_generation":N}, then one action per line.
std::string retune_log_jsonl(const RetuneLog& log);
RetuneLog parse_retune_log(std::string_view text);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace netsig
