#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "netsig/detectors.hpp"
#include "netsig/pipeline.hpp"
#include "netsig/signatures.hpp"

namespace netsig {

struct MergeSignatures {
  std::string a;  // survives; b's members and exemptions fold into it
  std::string b;
  bool operator==(const MergeSignatures&) const = default;
};

struct AdjustThreshold {
  std::string signature_id;
  double threshold = 0;
  bool operator==(const AdjustThreshold&) const = default;
};

struct WhitelistValue {
  std::string signature_id;
  std::string feature;
  std::string value;
  bool operator==(const WhitelistValue&) const = default;
};

struct SuppressFinding {
  std::string property_id;
  std::string signature_id;
  bool operator==(const SuppressFinding&) const = default;
};

using RetuneOp = std::variant<MergeSignatures, AdjustThreshold, WhitelistValue, SuppressFinding>;

struct RetuneAction {
  RetuneOp op;
  std::uint64_t generation = 0;  // generation of the set the action was built against
  std::string author;
  std::string timestamp;
  std::optional<std::string> note;
  bool operator==(const RetuneAction&) const = default;
};

struct RetuneLog {
  std::uint64_t base_generation = 0;
  std::vector<RetuneAction> actions;
};

// Returns a new set with generation + 1; `set` is left untouched.
// Throws Error{StaleGeneration, UnknownSignature, KindMismatch, InvalidAction}.
SignatureSet apply_retune(const SignatureSet& set, const RetuneAction& action, const EncodedView& corpus);

// Findings of the signature detector under `set`. Throws Error{GenerationMismatch}.
std::vector<Finding> recompute(const CorpusBundle& bundle, const SignatureSet& set);

// Folds apply_retune over the log. Errors carry the failing action index.
SignatureSet replay(const RetuneLog& log, const SignatureSet& base, const EncodedView& corpus);

}  // namespace netsig
