#include "netsig/metrics.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "netsig/error.hpp"

namespace netsig {

namespace {

__extension__ typedef unsigned __int128 u128;

int compare(const Ratio& a, const Ratio& b) {
  if (!a.defined() || !b.defined()) return static_cast<int>(a.defined()) - static_cast<int>(b.defined());
  const u128 l = static_cast<u128>(a.num) * b.den;
  const u128 r = static_cast<u128>(b.num) * a.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

}  // namespace

std::optional<double> Ratio::value() const {
  if (!defined()) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool operator>=(const Ratio& a, const Ratio& b) { return compare(a, b) >= 0; }
bool operator>(const Ratio& a, const Ratio& b) { return compare(a, b) > 0; }
bool Ratio::operator==(const Ratio& o) const { return compare(*this, o) == 0; }

EvalMetrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  EvalMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.emitted_findings = tp + fp;
  m.labeled_findings = tp + fp;
  return m;
}

EvalMetrics compute_metrics(const std::vector<Finding>& findings, const GroundTruth& truth) {
  EvalMetrics m;
  m.emitted_findings = findings.size();
  std::set<std::string_view> flagged;
  for (const auto& f : findings) {
    if (truth.labels.count(f.property_id)) flagged.insert(f.property_id);
  }
  m.labeled_findings = flagged.size();
  for (const auto& [id, label] : truth.labels) {
    const bool hit = flagged.count(id) > 0;
    if (hit && label.buggy) ++m.tp;
    if (hit && !label.buggy) ++m.fp;
    if (!hit && label.buggy) ++m.fn;
  }
  return m;
}

std::vector<DetectorRun> default_detector_runs(std::uint64_t seed) {
  auto run = [seed](std::string name, Method m, bool retune = false) {
    DetectorConfig c;
    c.method = m;
    c.seed = seed;
    return DetectorRun{std::move(name), c, retune};
  };
  return {run("zscore", Method::ZScore), run("modified_zscore", Method::ModifiedZScore), run("gmm", Method::Gmm),
          run("signature", Method::Signature), run("signature+retune", Method::Signature, true)};
}

ScriptedSession scripted_retune(const CorpusBundle& bundle, const SignatureSet& base, const GroundTruth& truth,
                                const std::string& author) {
  ScriptedSession session;
  session.log.base_generation = base.generation;
  session.generations.push_back(base);
  for (const auto& f : detect_signature_outliers(bundle, base)) {
    auto it = truth.labels.find(f.property_id);
    if (it == truth.labels.end() || it->second.buggy || !f.violated_signature) continue;
    RetuneAction action{SuppressFinding{f.property_id, *f.violated_signature},
                        session.generations.back().generation, author,
                        fmt::format("step-{:06}", session.log.actions.size()), std::string("labeled clean")};
    session.generations.push_back(apply_retune(session.generations.back(), action, bundle.view()));
    session.log.actions.push_back(std::move(action));
  }
  return session;
}

std::vector<ComparisonRow> compare_detectors(const CorpusBundle& bundle, const GroundTruth& truth,
                                             const std::vector<DetectorRun>& runs, const MiningParams& params) {
  if (runs.size() < 2) throw Error(ErrorCode::InvalidConfig, "compare_detectors needs at least two detector runs");
  std::optional<SignatureSet> mined;
  std::string mining_error;
  auto signatures = [&]() -> const SignatureSet& {
    if (!mined && mining_error.empty()) {
      try {
        mined = mine_signatures(bundle.view(), params);
      } catch (const Error& e) {
        mining_error = e.detail();
      }
    }
    if (!mined) throw Error(ErrorCode::TooFewProperties, mining_error);
    return *mined;
  };

  std::vector<ComparisonRow> rows;
  for (const auto& run : runs) {
    ComparisonRow row;
    row.name = run.name;
    try {
      run.config.validate();
      std::vector<Finding> findings;
      if (run.config.method == Method::Signature) {
        const SignatureSet* set = &signatures();
        std::optional<ScriptedSession> session;
        if (run.scripted_retune) {
          session = scripted_retune(bundle, *set, truth);
          set = &session->generations.back();
          row.retune_actions = session->log.actions.size();
        }
        findings = detect_signature_outliers(bundle, *set);
        row.signature_count = set->signatures.size();
        std::set<std::string> violated;
        for (const auto& f : findings) {
          if (f.violated_signature) violated.insert(*f.violated_signature);
        }
        row.violated_signature_count = violated.size();
      } else {
        findings = run_detector(run.config, bundle);
      }
      row.metrics = compute_metrics(findings, truth);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ratio(const Ratio& r, int digits) {
  auto v = r.value();
  return v ? fmt::format("{:.{}f}", *v, digits) : std::string("undefined");
}

std::string render_comparison_text(const std::vector<ComparisonRow>& rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::string out = fmt::format("{:<{}}  {:>6}  {:>6}  {:>6}  {:>9}  {:>9}  {:>8}\n", "detector", width, "TP", "FP",
                                "FN", "precision", "recall", "findings");
  for (const auto& r : rows) {
    if (!r.metrics) {
      out += fmt::format("{:<{}}  failed: {}\n", r.name, width, r.error);
      continue;
    }
    const auto& m = *r.metrics;
    out += fmt::format("{:<{}}  {:>6}  {:>6}  {:>6}  {:>9}  {:>9}  {:>8}\n", r.name, width, m.tp, m.fp, m.fn,
                       format_ratio(m.precision()), format_ratio(m.recall()), m.emitted_findings);
  }
  return out;
}

}  // namespace netsig
