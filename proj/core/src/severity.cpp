#include "netsig/severity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "netsig/error.hpp"
#include "netsig/util.hpp"

namespace netsig {

double SeverityWeights::weight(ProblemType t) const {
  auto it = problem_type_weight.find(t);
  return it == problem_type_weight.end() ? 0.0 : it->second;
}

void SeverityWeights::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0; };
  if (!ok(alpha) || !ok(beta)) throw Error(ErrorCode::InvalidConfig, "alpha and beta must be finite and >= 0");
  for (const auto& [t, w] : problem_type_weight) {
    if (!ok(w)) throw Error(ErrorCode::InvalidConfig, fmt::format("weight for {} must be finite and >= 0", to_string(t)));
  }
}

SeverityWeights parse_severity_weights(std::string_view text) {
  SeverityWeights w;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto body = trim(line);
    if (body.empty() || body.front() == '[') continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: expected key = value", lineno));
    }
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    double v;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: '{}' is not a number", lineno, value));
    }
    if (key == "alpha") {
      w.alpha = v;
    } else if (key == "beta") {
      w.beta = v;
    } else if (key.rfind("weight.", 0) == 0) {
      auto t = problem_type_from_string(std::string_view(key).substr(7));
      if (!t) throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: unknown problem type in '{}'", lineno, key));
      w.problem_type_weight[*t] = v;
    } else {
      throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: unknown key '{}'", lineno, key));
    }
  }
  w.validate();
  return w;
}

SeverityWeights load_severity_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_severity_weights(ss.str());
}

double compute_severity(const Finding& finding, const ReferenceGraph& graph, const SeverityWeights& weights) {
  const auto radius = static_cast<double>(blast_radius(graph, finding.property_id));
  const double normalized = finding.threshold > 0 ? finding.outlier_score / finding.threshold : finding.outlier_score;
  return weights.beta * normalized * weights.weight(finding.problem_type) * (1.0 + weights.alpha * radius);
}

void apply_severity(std::vector<Finding>& findings, const ReferenceGraph& graph, const SeverityWeights& weights) {
  weights.validate();
  for (auto& f : findings) {
    f.blast_radius = blast_radius(graph, f.property_id);
    f.severity = compute_severity(f, graph, weights);
  }
}

std::string_view to_string(RankMode m) { return m == RankMode::Outlier ? "outlier" : "severity"; }

std::vector<Finding> rank(std::vector<Finding> findings, RankMode mode, const SeverityWeights& weights) {
  if (mode == RankMode::Severity) {
    for (const auto& f : findings) {
      if (!f.severity) throw Error(ErrorCode::MissingSeverity, f.property_id);
    }
  }
  auto score = [mode](const Finding& f) { return mode == RankMode::Severity ? *f.severity : f.outlier_score; };
  std::sort(findings.begin(), findings.end(), [&](const Finding& a, const Finding& b) {
    const double sa = score(a), sb = score(b);
    if (sa != sb) return sa > sb;
    const double wa = weights.weight(a.problem_type), wb = weights.weight(b.problem_type);
    if (wa != wb) return wa > wb;
    return a.property_id < b.property_id;
  });
  for (std::size_t i = 0; i < findings.size(); ++i) findings[i].rank = i + 1;
  return findings;
}

double kendall_tau(const std::vector<std::string>& order_a, const std::vector<std::string>& order_b) {
  if (order_a.size() != order_b.size()) throw Error(ErrorCode::InvalidConfig, "orderings differ in length");
  const auto n = order_a.size();
  if (n < 2) return 1.0;
  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < n; ++i) pos_b.emplace(order_b[i], i);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = pos_b.find(order_a[i]);
    if (it == pos_b.end()) throw Error(ErrorCode::InvalidConfig, "orderings differ in membership: " + order_a[i]);
    perm[i] = it->second;
  }
  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) (perm[i] < perm[j] ? concordant : discordant)++;
  }
  return static_cast<double>(concordant - discordant) / static_cast<double>(concordant + discordant);
}

}  // namespace netsig
