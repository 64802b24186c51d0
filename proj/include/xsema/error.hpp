#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xsema {

enum class ErrorCode {
  // core-model
  MalformedHex,
  FieldMissing,
  KindMismatch,
  MalformedValue,
  // ingest
  IoError,
  ParseError,
  DuplicateHash,
  SchemaViolation,
  NetworkError,
  TxNotFound,
  TraceUnsupported,
  RateLimited,
  ConflictingLabel,
  MissingDefault,
  // motif
  GraphTooLarge,
  UnsupportedCatalog,
  // encoder
  DimensionMismatch,
  ServerError,
  MissingClass,
  NonFiniteInput,
  Divergence,
  // fuse
  EmptyTrain,
  UnfittedScaler,
  // classify
  SingleClassInput,
  NonFiniteFeature,
  VersionMismatch,
  CorruptBundle,
  // eval / analyze
  LengthMismatch,
  EmptyInput,
  EmptyDataset,
  EmptyTrainBridges,
  BridgeOverlap,
  ConfigInvalid,
  // synth
  UnrealizableMotif,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `component()` names the module that
/// raised it so the CLI can report where a run broke.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string component, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(message),
        code_(code),
        component_(std::move(component)),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& component() const noexcept { return component_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string component_;
  std::optional<std::size_t> line_;
};

}  // namespace xsema
