#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace omg {

enum class ErrorCode {
  InvalidInput,
  MissingSlot,
  TransportError,
  RateLimited,
  MockScriptMiss,
  SchemaViolation,
  TaxonomyViolation,
  SameBackend,
  EmptyClass,
  EmptyInput,
  ZeroVector,
  DimensionMismatch,
  RationaleRequired,
  MissingOracleInterpretations,
  MissingReference,
  MissingAnnotation,
  MissingDependency,
  PreconditionNotFailed,
  ManifestMismatch,
  IoError,
  ParseError,
  Locked,
  UnknownBackend,
  Config,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the toolkit. `stage` is set when the error
/// escaped one of the three annotation stages (1, 2 or 3).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<int> stage = std::nullopt)
      : std::runtime_error(message), code_(code), stage_(stage) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<int> stage() const noexcept { return stage_; }

 private:
  ErrorCode code_;
  std::optional<int> stage_;
};

}  // namespace omg
