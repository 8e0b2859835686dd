#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uaweight {

enum class ErrorCode {
  // corpus
  MissingColumn,
  DuplicateId,
  AspectNotInText,
  UnknownLabel,
  MalformedSidecar,
  DimMismatch,
  NonFiniteValue,
  WrongKind,
  MissingEmbedding,
  // imgqual
  UndecodableImage,
  ZeroPixelImage,
  InconsistentLMax,
  // relevance
  ZeroVector,
  BatchTooSmall,
  // weighting / trainer
  NonFiniteComponent,
  ShapeMismatch,
  NegativeWeight,
  DegenerateData,
  // synth
  UnknownKind,
  // shared
  InvalidConfig,
  IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code so the
/// command-line front end can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace uaweight
