#include "netsig/retune.hpp"

#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "netsig/error.hpp"

namespace netsig {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Signature& require(SignatureSet& set, const std::string& id) {
  auto* sig = set.find(id);
  if (!sig) throw Error(ErrorCode::UnknownSignature, id);
  return *sig;
}

void merge(SignatureSet& set, const MergeSignatures& m, const EncodedView& corpus) {
  if (m.a == m.b) throw Error(ErrorCode::InvalidAction, "cannot merge a signature with itself: " + m.a);
  Signature& a = require(set, m.a);
  const Signature& b = require(set, m.b);
  if (a.kind != b.kind) {
    throw Error(ErrorCode::KindMismatch, fmt::format("{} is {}, {} is {}", a.id, to_string(a.kind), b.id,
                                                     to_string(b.kind)));
  }
  std::unordered_map<std::string_view, const FeatureVector*> by_id;
  for (const auto& v : corpus.vectors) by_id.emplace(v.property_id, &v);
  std::vector<const FeatureVector*> pooled;
  const std::vector<std::string>* sources[] = {&a.members, &b.members};
  for (const auto* members : sources) {
    for (const auto& id : *members) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorCode::UnknownProperty, id);
      pooled.push_back(it->second);
    }
  }
  Signature merged = compute_signature_stats(a.kind, pooled, corpus.tokens);
  merged.id = a.id;
  merged.name_template = a.name_template;
  merged.threshold = a.threshold;
  merged.whitelist = a.whitelist;
  for (const auto& [feature, values] : b.whitelist) merged.whitelist[feature].insert(values.begin(), values.end());
  merged.suppressed = a.suppressed;
  merged.suppressed.insert(b.suppressed.begin(), b.suppressed.end());

  const std::string removed = b.id;
  a = std::move(merged);
  std::erase_if(set.signatures, [&](const Signature& s) { return s.id == removed; });
  for (auto& [pid, sid] : set.assignment) {
    if (sid == removed) sid = m.a;
  }
}

}  // namespace

SignatureSet apply_retune(const SignatureSet& set, const RetuneAction& action, const EncodedView& corpus) {
  if (action.generation != set.generation) {
    throw Error(ErrorCode::StaleGeneration,
                fmt::format("action built against generation {}, current is {}", action.generation, set.generation));
  }
  SignatureSet next = set;
  std::visit(overloaded{
                 [&](const MergeSignatures& m) { merge(next, m, corpus); },
                 [&](const AdjustThreshold& t) {
                   if (!(t.threshold > 0) || !std::isfinite(t.threshold)) {
                     throw Error(ErrorCode::InvalidAction, fmt::format("threshold must be > 0, got {}", t.threshold));
                   }
                   require(next, t.signature_id).threshold = t.threshold;
                 },
                 [&](const WhitelistValue& w) {
                   Signature& sig = require(next, w.signature_id);
                   if (!feature_schema(sig.kind).find(w.feature)) {
                     throw Error(ErrorCode::InvalidAction,
                                 fmt::format("{} has no feature '{}'", to_string(sig.kind), w.feature));
                   }
                   sig.whitelist[w.feature].insert(w.value);
                 },
                 [&](const SuppressFinding& s) {
                   Signature& sig = require(next, s.signature_id);
                   auto it = next.assignment.find(s.property_id);
                   if (it == next.assignment.end() || it->second != sig.id) {
                     throw Error(ErrorCode::InvalidAction,
                                 fmt::format("{} is not assigned to {}", s.property_id, s.signature_id));
                   }
                   sig.suppressed.insert(s.property_id);
                 },
             },
             action.op);
  next.generation = set.generation + 1;
  return next;
}

std::vector<Finding> recompute(const CorpusBundle& bundle, const SignatureSet& set) {
  return detect_signature_outliers(bundle, set);
}

SignatureSet replay(const RetuneLog& log, const SignatureSet& base, const EncodedView& corpus) {
  if (log.base_generation != base.generation) {
    throw Error(ErrorCode::StaleGeneration, fmt::format("log starts at generation {}, base set is at {}",
                                                        log.base_generation, base.generation));
  }
  SignatureSet current = base;
  for (std::size_t i = 0; i < log.actions.size(); ++i) {
    try {
      current = apply_retune(current, log.actions[i], corpus);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("action {}: {}", i, e.detail()));
    }
  }
  return current;
}

}  // namespace netsig
