#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netsig {

enum class ErrorCode {
  MalformedStanza,
  DuplicateStanzaName,
  DuplicateDevice,
  EmptySnapshot,
  IoError,
  UnknownProperty,
  EncodingOverflow,
  TooFewProperties,
  KindNotMined,
  SeriesTooShort,
  DegenerateComponent,
  SchemaMismatch,
  GenerationMismatch,
  MissingSeverity,
  UnknownSignature,
  KindMismatch,
  StaleGeneration,
  InvalidAction,
  InvalidConfig,
  InfeasibleSpec,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the library are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace netsig
