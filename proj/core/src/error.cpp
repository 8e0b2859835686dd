#include "uaweight/error.hpp"

namespace uaweight {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::AspectNotInText: return "AspectNotInText";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::MalformedSidecar: return "MalformedSidecar";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::UndecodableImage: return "UndecodableImage";
    case ErrorCode::ZeroPixelImage: return "ZeroPixelImage";
    case ErrorCode::InconsistentLMax: return "InconsistentLMax";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::NonFiniteComponent: return "NonFiniteComponent";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace uaweight
