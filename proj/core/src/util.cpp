#include "netsig/util.hpp"

#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "netsig/error.hpp"

namespace netsig {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedStanza: return "MalformedStanza";
    case ErrorCode::DuplicateStanzaName: return "DuplicateStanzaName";
    case ErrorCode::DuplicateDevice: return "DuplicateDevice";
    case ErrorCode::EmptySnapshot: return "EmptySnapshot";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownProperty: return "UnknownProperty";
    case ErrorCode::EncodingOverflow: return "EncodingOverflow";
    case ErrorCode::TooFewProperties: return "TooFewProperties";
    case ErrorCode::KindNotMined: return "KindNotMined";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::DegenerateComponent: return "DegenerateComponent";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::GenerationMismatch: return "GenerationMismatch";
    case ErrorCode::MissingSeverity: return "MissingSeverity";
    case ErrorCode::UnknownSignature: return "UnknownSignature";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::StaleGeneration: return "StaleGeneration";
    case ErrorCode::InvalidAction: return "InvalidAction";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string Fnv1a::hex() const { return fmt::format("{:016x}", state_); }

std::string fnv1a_hex(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.hex();
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string digit_template(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool in_digits = false;
  for (char c : name) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      if (!in_digits) out += '#';
      in_digits = true;
    } else {
      out += c;
      in_digits = false;
    }
  }
  return out;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % span);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

}  // namespace netsig
